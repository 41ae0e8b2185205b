//! Simplex measures and centers in an arbitrary embedding dimension.

use nalgebra::{DMatrix, DVector};

fn edge_matrix(pts: &[&[f64]]) -> DMatrix<f64> {
    let d = pts[0].len();
    let k = pts.len() - 1;
    DMatrix::from_fn(d, k, |r, c| pts[c + 1][r] - pts[0][r])
}

fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

/// Unsigned k-volume of the simplex spanned by `pts` (k = len − 1).
/// A single point has volume 1.
pub fn simplex_volume(pts: &[&[f64]]) -> f64 {
    if pts.len() <= 1 {
        return 1.0;
    }
    let g = edge_matrix(pts);
    let gram = g.transpose() * &g;
    gram.determinant().max(0.0).sqrt() / factorial(pts.len() - 1)
}

pub fn barycenter(pts: &[&[f64]]) -> Vec<f64> {
    let d = pts[0].len();
    let w = 1.0 / pts.len() as f64;
    (0..d).map(|r| pts.iter().map(|p| p[r]).sum::<f64>() * w).collect()
}

/// Circumcenter within the affine hull of `pts`.
pub fn circumcenter(pts: &[&[f64]]) -> Vec<f64> {
    if pts.len() == 1 {
        return pts[0].to_vec();
    }
    let g = edge_matrix(pts);
    let gram = g.transpose() * &g;
    let rhs = DVector::from_fn(gram.nrows(), |i, _| 0.5 * gram[(i, i)]);
    let alpha = gram
        .lu()
        .solve(&rhs)
        .unwrap_or_else(|| DVector::zeros(rhs.len()));
    let c = g * alpha;
    pts[0].iter().zip(c.iter()).map(|(a, b)| a + b).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Longest edge of the simplex; 0 for a point.
pub fn diameter(pts: &[&[f64]]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            m = m.max(norm(&sub(pts[i], pts[j])));
        }
    }
    m
}

/// Unit outward conormal of the facet `face` of the simplex whose
/// remaining vertex is `opposite`: the direction from `opposite` to its
/// projection onto the facet's affine hull.
pub fn outward_conormal(face: &[&[f64]], opposite: &[f64]) -> Vec<f64> {
    let base = face[0];
    let rel = sub(opposite, base);
    let proj = if face.len() == 1 {
        vec![0.0; rel.len()]
    } else {
        let g = edge_matrix(face);
        let gram = g.transpose() * &g;
        let rhs = g.transpose() * DVector::from_column_slice(&rel);
        let a = gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(rhs.len()));
        (g * a).iter().copied().collect()
    };
    let v: Vec<f64> = proj.iter().zip(&rel).map(|(p, r)| p - r).collect();
    let l = norm(&v);
    v.into_iter().map(|x| x / l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        let (o, x, y, z) = ([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        assert_eq!(simplex_volume(&[&o]), 1.0);
        assert_eq!(simplex_volume(&[&o, &x]), 1.0);
        assert!((simplex_volume(&[&o, &x, &y]) - 0.5).abs() < 1e-15);
        assert!((simplex_volume(&[&o, &x, &y, &z]) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn right_triangle_circumcenter_is_hypotenuse_midpoint() {
        let c = circumcenter(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]]);
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conormal_points_away() {
        let n = outward_conormal(&[&[0.0, 0.0], &[1.0, 0.0]], &[0.3, 1.0]);
        assert!(n[1] < 0.0 && n[0].abs() < 1e-15);
        assert!((norm(&n) - 1.0).abs() < 1e-15);
    }
}
