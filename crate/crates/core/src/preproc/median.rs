use crate::imgcore::Raster;
use crate::par;

/// Median over the `(2r+1)²` window with edge replication.
pub fn median_filter(gray: &Raster, radius: usize) -> Raster {
    assert!(radius >= 1, "median radius must be >= 1");
    let gray = gray.to_grayscale();
    let (w, h) = gray.dims();
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mut out = vec![0u8; w * h];
    par::for_each_row(&mut out, w, |y, row| {
        let mut window = Vec::with_capacity(side * side);
        for (x, o) in row.iter_mut().enumerate() {
            window.clear();
            for dy in -r..=r {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in -r..=r {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    window.push(gray.get(xx, yy));
                }
            }
            let mid = window.len() / 2;
            *o = *window.select_nth_unstable(mid).1;
        }
    });
    Raster::from_vec(w, h, 1, out).expect("same dimensions")
}
