use crate::imgcore::mask::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

/// One connected foreground component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// 1-based label in [`Labeling::labels`].
    pub label: u32,
    /// Member pixels in row-major order.
    pub pixels: Vec<(usize, usize)>,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_pixels(width, height, &self.pixels)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub width: usize,
    pub height: usize,
    /// Per-pixel label; 0 is background.
    pub labels: Vec<u32>,
    /// Components ordered by their first pixel in row-major order.
    pub components: Vec<Component>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass union-find labeling.
pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> Labeling {
    let (w, h) = mask.dims();
    let mut provisional = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            let mut push = |nx: isize, ny: isize| {
                if nx >= 0 && ny >= 0 && (nx as usize) < w {
                    let l = provisional[ny as usize * w + nx as usize];
                    if l != 0 {
                        neighbors[n] = l;
                        n += 1;
                    }
                }
            };
            let (xi, yi) = (x as isize, y as isize);
            push(xi - 1, yi);
            push(xi, yi - 1);
            if connectivity == Connectivity::Eight {
                push(xi - 1, yi - 1);
                push(xi + 1, yi - 1);
            }
            let label = if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                l
            } else {
                let l = *neighbors[..n].iter().min().unwrap();
                for &other in &neighbors[..n] {
                    union(&mut parent, l, other);
                }
                l
            };
            provisional[y * w + x] = label;
        }
    }

    let mut remap = vec![0u32; parent.len()];
    let mut labels = vec![0u32; w * h];
    let mut components: Vec<Component> = Vec::new();
    for (i, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = find(&mut parent, p) as usize;
        if remap[root] == 0 {
            components.push(Component {
                label: components.len() as u32 + 1,
                pixels: Vec::new(),
            });
            remap[root] = components.len() as u32;
        }
        let l = remap[root];
        labels[i] = l;
        components[l as usize - 1].pixels.push((i % w, i / w));
    }
    Labeling {
        width: w,
        height: h,
        labels,
        components,
    }
}
