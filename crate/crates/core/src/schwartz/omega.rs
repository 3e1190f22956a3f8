use serde::Serialize;

/// Open half-space `{ z : normal·z > offset }`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    /// Signed Euclidean distance of `z` from the bounding hyperplane,
    /// positive inside.
    pub fn distance(&self, z: &[f64]) -> f64 {
        let dot: f64 = self.normal.iter().zip(z).map(|(a, b)| a * b).sum();
        let norm = self.normal.iter().map(|a| a * a).sum::<f64>().sqrt();
        (dot - self.offset) / norm
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for (j, a) in self.normal.iter().enumerate().filter(|(_, a)| **a != 0.0) {
            let sign = if a.is_sign_negative() { "-" } else if s.is_empty() { "" } else { "+" };
            let mag = a.abs();
            if mag == 1.0 {
                s.push_str(&format!("{sign}u{}", j + 1));
            } else {
                s.push_str(&format!("{sign}{mag}*u{}", j + 1));
            }
        }
        format!("{s} > {}", self.offset)
    }
}

/// Chart domain: an intersection of open affine half-spaces (all of `R^n`
/// when empty).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Omega {
    pub dim: usize,
    pub constraints: Vec<HalfSpace>,
}

impl Omega {
    pub fn whole(dim: usize) -> Self {
        Self { dim, constraints: Vec::new() }
    }

    /// Open box `lo_j < z_j < hi_j`; infinite bounds are skipped.
    pub fn open_box(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        let mut constraints = Vec::new();
        for j in 0..dim {
            let mut e = vec![0.0; dim];
            if lo[j].is_finite() {
                e[j] = 1.0;
                constraints.push(HalfSpace { normal: e.clone(), offset: lo[j] });
            }
            if hi[j].is_finite() {
                e[j] = -1.0;
                constraints.push(HalfSpace { normal: e, offset: -hi[j] });
            }
        }
        Self { dim, constraints }
    }

    pub fn with(mut self, normal: Vec<f64>, offset: f64) -> Self {
        assert_eq!(normal.len(), self.dim);
        self.constraints.push(HalfSpace { normal, offset });
        self
    }

    /// Smallest distance to the boundary (infinite for `R^n`).
    pub fn depth(&self, z: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.distance(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: &[f64], margin: f64) -> bool {
        self.depth(z) > margin
    }

    /// First constraint violated at `z` with the given margin.
    pub fn violated(&self, z: &[f64], margin: f64) -> Option<&HalfSpace> {
        self.constraints.iter().find(|c| c.distance(z) <= margin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_halfspace() {
        let o = Omega::open_box(&[-1.0], &[1.0]);
        assert!(o.contains(&[0.5], 0.0));
        assert!(!o.contains(&[2.0], 0.0));
        assert_eq!(o.violated(&[2.0], 0.0).unwrap().describe(), "-u1 > -1");
        let chart = Omega::whole(2).with(vec![1.0, -1.0], 0.0);
        assert!(chart.contains(&[0.3, -0.3], 0.0));
        assert!(!chart.contains(&[0.3, 0.3], 0.0));
        assert!((chart.depth(&[1.0, -1.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(chart.constraints[0].describe(), "u1-u2 > 0");
        assert!(Omega::whole(3).contains(&[1e9, 0.0, 0.0], 1.0));
    }
}
