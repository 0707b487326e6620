//! Exact rational convex polytopes in the weight space `M_R = Q^r`.
//!
//! A [`Polytope`] carries both representations: the lexicographically sorted
//! vertex list and the facet inequalities `<α, ρ_j> >= -c_j` with primitive
//! integer normals `ρ_j`. Both are derived from the input points on
//! construction and cross-checked against each other.
//!
//! # Toric log discrepancy
//!
//! For a coweight `ρ` the monomial valuation `wt_ρ` has log discrepancy
//!
//! ```text
//! A(wt_ρ) = -min_{α ∈ P} <α, ρ> = support_value(P, ρ).
//! ```
//!
//! The facet offsets are `c_j = A(ord D_j)` for the toric boundary divisors
//! `D_j`, which is the statement `support_value(P, ρ_j) = c_j`. For `ρ` in the
//! normal cone of a vertex `v`, the minimum of `<·, ρ>` over `P` is attained at
//! `v`, so `A` is the piecewise-linear extension of the values `c_j` over the
//! normal fan. Offsets other than 1 encode a boundary: `c_j = 1 - (coefficient
//! of D_j in Δ)`. Any positive rational offsets are accepted.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{dot, to_f64, to_f64_vec, Q};

/// Facet inequality `<α, normal> >= -offset`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: Q,
}

impl Facet {
    pub fn normal_q(&self) -> Vec<Q> {
        self.normal.iter().cloned().map(Q::from_integer).collect()
    }

    /// `<α, ρ> + c`, nonnegative exactly on the half-space.
    pub fn slack(&self, point: &[Q]) -> Q {
        let mut s = self.offset.clone();
        for (n, x) in self.normal.iter().zip(point) {
            s += x * n;
        }
        s
    }

    /// Scales `(normal, offset)` so that the normal is a primitive integer vector.
    fn canonical(normal: &[Q], offset: Q) -> Facet {
        let lcm = normal.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = normal
            .iter()
            .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        let scale = Q::new(lcm, gcd.clone());
        Facet {
            normal: ints.into_iter().map(|x| x / &gcd).collect(),
            offset: offset * scale,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simplex {
    pub vertices: Vec<Vec<Q>>,
    pub volume: Q,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<Q>>) -> Result<Self> {
        let r = vertices.len().saturating_sub(1);
        if vertices.iter().any(|v| v.len() != r) {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: vertices.first().map_or(0, Vec::len),
            });
        }
        let edges: Vec<Vec<Q>> = vertices[1..]
            .iter()
            .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a - b).collect())
            .collect();
        let volume = linalg::det(&edges).abs() / Q::from_integer(factorial(r));
        if volume.is_zero() {
            let refs: Vec<&[Q]> = vertices.iter().map(Vec::as_slice).collect();
            return Err(Error::DegeneratePolytope {
                expected: r,
                found: linalg::affine_dim(&refs),
            });
        }
        Ok(Simplex { vertices, volume })
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn centroid(&self) -> Vec<Q> {
        let n = Q::from_integer(BigInt::from(self.vertices.len()));
        (0..self.dim())
            .map(|i| self.vertices.iter().fold(Q::zero(), |acc, v| acc + &v[i]) / &n)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    pub simplices: Vec<Simplex>,
    /// Vertex indices into the parent polytope, apex first.
    pub cells: Vec<Vec<usize>>,
}

impl Triangulation {
    pub fn volume(&self) -> Q {
        self.simplices.iter().fold(Q::zero(), |acc, s| acc + &s.volume)
    }
}

#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<Q>>,
    facets: Vec<Facet>,
    /// Vertex indices lying on each facet.
    incidence: Vec<Vec<usize>>,
    triangulation: OnceLock<Triangulation>,
}

impl Polytope {
    /// Convex hull of `points`. Non-extreme and duplicate points are dropped.
    pub fn from_points(points: &[Vec<Q>]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let dim = first.len();
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        if dim == 0 {
            return Err(Error::DegeneratePolytope { expected: 0, found: 0 });
        }
        let pts: Vec<Vec<Q>> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let refs: Vec<&[Q]> = pts.iter().map(Vec::as_slice).collect();
        let hull_dim = linalg::affine_dim(&refs);
        if hull_dim < dim {
            return Err(Error::DegeneratePolytope {
                expected: dim,
                found: hull_dim,
            });
        }

        let facets = supporting_facets(&pts, dim);
        let vertices: Vec<Vec<Q>> = pts
            .into_iter()
            .filter(|p| {
                let tight: Vec<Vec<Q>> = facets
                    .iter()
                    .filter(|f| f.slack(p).is_zero())
                    .map(Facet::normal_q)
                    .collect();
                linalg::rank(&tight) == dim
            })
            .collect();
        let polytope = Self::assemble(dim, vertices, facets);

        let from_facets = vertices_from_facets(dim, &polytope.facets);
        if from_facets != polytope.vertices {
            return Err(Error::InconsistentPolytope(format!(
                "{} hull vertices but {} facet-derived vertices",
                polytope.vertices.len(),
                from_facets.len()
            )));
        }
        Ok(polytope)
    }

    pub fn from_i64(points: &[&[i64]]) -> Result<Self> {
        let pts: Vec<Vec<Q>> = points
            .iter()
            .map(|p| p.iter().map(|&x| Q::from_integer(x.into())).collect())
            .collect();
        Self::from_points(&pts)
    }

    /// Intersection of the half-spaces `<α, normal> >= -offset`.
    pub fn from_facets(dim: usize, facets: &[(Vec<Q>, Q)]) -> Result<Self> {
        let canon: Vec<Facet> = facets.iter().map(|(n, c)| Facet::canonical(n, c.clone())).collect();
        let vertices = vertices_from_facets(dim, &canon);
        if vertices.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::from_points(&vertices)
    }

    fn assemble(dim: usize, vertices: Vec<Vec<Q>>, facets: Vec<Facet>) -> Self {
        let incidence = facets
            .iter()
            .map(|f| {
                (0..vertices.len())
                    .filter(|&i| f.slack(&vertices[i]).is_zero())
                    .collect()
            })
            .collect();
        Polytope {
            dim,
            vertices,
            facets,
            incidence,
            triangulation: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| to_f64_vec(v)).collect()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn incidence(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    /// `a(ρ) = -min_{α ∈ P} <α, ρ>`.
    pub fn support_value(&self, rho: &[Q]) -> Q {
        self.vertices
            .iter()
            .map(|v| dot(v, rho))
            .min()
            .map(|m| -m)
            .expect("polytope has vertices")
    }

    pub fn support_value_f64(&self, rho: &[f64]) -> f64 {
        -self
            .vertices
            .iter()
            .map(|v| v.iter().zip(rho).map(|(a, b)| to_f64(a) * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, point: &[Q]) -> bool {
        self.facets.iter().all(|f| !f.slack(point).is_negative())
    }

    /// True when every facet offset is positive, i.e. the origin is interior.
    pub fn origin_interior(&self) -> bool {
        self.facets.iter().all(|f| f.offset.is_positive())
    }

    pub fn triangulation(&self) -> &Triangulation {
        self.triangulation.get_or_init(|| self.triangulate())
    }

    pub fn volume(&self) -> Q {
        self.triangulation().volume()
    }

    /// Exact barycenter from the simplex centroids.
    pub fn barycenter(&self) -> Vec<Q> {
        let tri = self.triangulation();
        let mut acc = vec![Q::zero(); self.dim];
        for s in &tri.simplices {
            for (a, c) in acc.iter_mut().zip(s.centroid()) {
                *a += c * &s.volume;
            }
        }
        let vol = tri.volume();
        acc.into_iter().map(|a| a / &vol).collect()
    }

    fn triangulate(&self) -> Triangulation {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let cells = self.triangulate_face(&all, self.dim);
        let simplices = cells
            .iter()
            .map(|c| {
                Simplex::new(c.iter().map(|&i| self.vertices[i].clone()).collect())
                    .expect("pulling triangulation cells are full-dimensional")
            })
            .collect();
        Triangulation { simplices, cells }
    }

    /// Pulling triangulation: cone from the lexicographically least vertex over
    /// the triangulated facets of the face that avoid it.
    fn triangulate_face(&self, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
        if dim == 0 {
            return vec![vec![face[0]]];
        }
        let apex = face[0];
        let face_set: HashSet<usize> = face.iter().copied().collect();
        let mut seen = HashSet::new();
        let mut cells = Vec::new();
        for inc in &self.incidence {
            let sub: Vec<usize> = inc.iter().copied().filter(|i| face_set.contains(i)).collect();
            if sub.is_empty() || sub.contains(&apex) || !seen.insert(sub.clone()) {
                continue;
            }
            let refs: Vec<&[Q]> = sub.iter().map(|&i| self.vertices[i].as_slice()).collect();
            if linalg::affine_dim(&refs) + 1 != dim {
                continue;
            }
            for mut cell in self.triangulate_face(&sub, dim - 1) {
                cell.insert(0, apex);
                cells.push(cell);
            }
        }
        cells
    }

    /// Integer points of the dilate `mP`, lexicographically ordered.
    pub fn lattice_points(&self, m: u32) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        self.for_each_lattice_point(m, |a| out.push(a.to_vec()));
        out
    }

    /// Visits `mP ∩ M` in lexicographic order without materializing it.
    pub fn for_each_lattice_point<F: FnMut(&[i64])>(&self, m: u32, mut f: F) {
        let mq = Q::from_integer(BigInt::from(m));
        let bounds: Vec<(i64, i64)> = (0..self.dim)
            .map(|i| {
                let lo = self.vertices.iter().map(|v| &v[i] * &mq).min().unwrap();
                let hi = self.vertices.iter().map(|v| &v[i] * &mq).max().unwrap();
                (
                    lo.ceil().to_integer().to_i64().expect("bounding box fits i64"),
                    hi.floor().to_integer().to_i64().expect("bounding box fits i64"),
                )
            })
            .collect();
        // <α, ρ> * den(c) >= -m * num(c)
        let tests: Vec<(Vec<i128>, i128, i128)> = self
            .facets
            .iter()
            .map(|f| {
                let normal = f.normal.iter().map(|x| x.to_i128().unwrap()).collect();
                let num = f.offset.numer().to_i128().unwrap() * i128::from(m);
                (normal, f.offset.denom().to_i128().unwrap(), num)
            })
            .collect();
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            return;
        }
        let mut cur: Vec<i64> = bounds.iter().map(|b| b.0).collect();
        loop {
            let inside = tests.iter().all(|(n, den, num)| {
                let s: i128 = n.iter().zip(&cur).map(|(a, &b)| a * i128::from(b)).sum();
                s * den >= -num
            });
            if inside {
                f(&cur);
            }
            let mut k = self.dim;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < bounds[k].1 {
                    cur[k] += 1;
                    for (c, b) in cur.iter_mut().zip(&bounds).skip(k + 1) {
                        *c = b.0;
                    }
                    break;
                }
            }
        }
    }
}

/// All facets of conv(points) by brute force over affinely independent
/// `dim`-subsets, canonically ordered.
fn supporting_facets(points: &[Vec<Q>], dim: usize) -> Vec<Facet> {
    let mut found: BTreeMap<Facet, ()> = BTreeMap::new();
    for combo in combinations(points.len(), dim) {
        let base = &points[combo[0]];
        let diffs: Vec<Vec<Q>> = combo[1..]
            .iter()
            .map(|&i| points[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let Some(normal) = linalg::kernel_vector(&diffs, dim) else {
            continue;
        };
        let h = dot(base, &normal);
        let values: Vec<Q> = points.iter().map(|p| dot(p, &normal)).collect();
        if values.iter().all(|v| *v >= h) {
            found.insert(Facet::canonical(&normal, -h), ());
        } else if values.iter().all(|v| *v <= h) {
            let neg: Vec<Q> = normal.iter().map(|x| -x).collect();
            found.insert(Facet::canonical(&neg, h), ());
        }
    }
    found.into_keys().collect()
}

/// Vertex enumeration from the H-representation, sorted and deduplicated.
pub fn vertices_from_facets(dim: usize, facets: &[Facet]) -> Vec<Vec<Q>> {
    let normals: Vec<Vec<Q>> = facets.iter().map(Facet::normal_q).collect();
    let mut out = BTreeSet::new();
    for combo in combinations(facets.len(), dim) {
        let a: Vec<Vec<Q>> = combo.iter().map(|&i| normals[i].clone()).collect();
        let b: Vec<Q> = combo.iter().map(|&i| -facets[i].offset.clone()).collect();
        if let Some(x) = linalg::solve(&a, &b) {
            if facets.iter().all(|f| !f.slack(&x).is_negative()) {
                out.insert(x);
            }
        }
    }
    out.into_iter().collect()
}

fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                cur = Some(next);
                break;
            }
        }
        Some(out)
    })
}

pub(crate) fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf, qvec};

    pub(crate) fn blp2() -> Polytope {
        Polytope::from_i64(&[&[-1, 0], &[0, -1], &[2, -1], &[-1, 2]]).unwrap()
    }

    fn square() -> Polytope {
        Polytope::from_i64(&[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1]]).unwrap()
    }

    fn facet_set(p: &Polytope) -> Vec<(Vec<i64>, Q)> {
        p.facets()
            .iter()
            .map(|f| (f.normal.iter().map(|x| x.to_i64().unwrap()).collect(), f.offset.clone()))
            .collect()
    }

    #[test]
    fn square_has_unit_offsets() {
        let p = square();
        assert_eq!(p.facets().len(), 4);
        assert!(p.facets().iter().all(|f| f.offset == q(1)));
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn blowup_facets_match_hand_dualization() {
        let f = facet_set(&blp2());
        let expected = vec![
            (vec![-1, -1], q(1)),
            (vec![0, 1], q(1)),
            (vec![1, 0], q(1)),
            (vec![1, 1], q(1)),
        ];
        assert_eq!(f, expected);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let err = Polytope::from_i64(&[&[0, 0], &[1, 1], &[2, 2]]).unwrap_err();
        assert!(matches!(err, Error::DegeneratePolytope { expected: 2, found: 1 }));
    }

    #[test]
    fn interior_and_duplicate_points_are_dropped() {
        let p = Polytope::from_i64(&[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1], &[0, 0], &[1, 1], &[0, 1]]).unwrap();
        assert_eq!(p.vertices(), square().vertices());
    }

    #[test]
    fn support_values() {
        let sq = square();
        assert_eq!(sq.support_value(&qvec(&[1, 0])), q(1));
        assert_eq!(sq.support_value(&qvec(&[1, 1])), q(2));
        assert_eq!(sq.support_value(&qvec(&[-1, -1])), q(2));
        assert_eq!(blp2().support_value(&qvec(&[1, 1])), q(1));
    }

    #[test]
    fn triangulation_volumes() {
        let sq = square();
        assert_eq!(sq.triangulation().simplices.len(), 2);
        assert_eq!(sq.volume(), q(4));
        let tri = Polytope::from_i64(&[&[0, 0], &[1, 0], &[0, 1]]).unwrap();
        assert_eq!(tri.triangulation().simplices.len(), 1);
        assert_eq!(tri.volume(), qf(1, 2));
        assert_eq!(blp2().volume(), q(4));
        let cube = Polytope::from_i64(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 1],
        ])
        .unwrap();
        assert_eq!(cube.volume(), q(1));
        assert_eq!(cube.triangulation().simplices.len(), 6);
    }

    #[test]
    fn lattice_point_counts() {
        let seg = Polytope::from_i64(&[&[-1], &[1]]).unwrap();
        assert_eq!(
            seg.lattice_points(2),
            vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]
        );
        assert_eq!(square().lattice_points(1).len(), 9);
        // the quadrilateral has 8 boundary points and the origin inside
        let pts = blp2().lattice_points(1);
        assert_eq!(pts.len(), 9);
        let mut brute = Vec::new();
        for x in -1..=2 {
            for y in -1..=2 {
                if x >= -1 && y >= -1 && x + y <= 1 && x + y >= -1 {
                    brute.push(vec![x, y]);
                }
            }
        }
        assert_eq!(pts, brute);
    }

    #[test]
    fn rational_vertices_and_facet_round_trip() {
        let pts = vec![vec![qf(-1, 2), q(-1)], vec![qf(3, 2), q(-1)], vec![q(-1), qf(5, 2)]];
        let p = Polytope::from_points(&pts).unwrap();
        let facets: Vec<(Vec<Q>, Q)> = p.facets().iter().map(|f| (f.normal_q(), f.offset.clone())).collect();
        let back = Polytope::from_facets(2, &facets).unwrap();
        assert_eq!(back.vertices(), p.vertices());
        for f in p.facets() {
            assert_eq!(p.support_value(&f.normal_q()), f.offset);
        }
    }

    #[test]
    fn blowup_barycenter() {
        assert_eq!(blp2().barycenter(), vec![qf(1, 12), qf(1, 12)]);
    }

    #[test]
    fn barycenter_matches_linear_moments() {
        let p = Polytope::from_i64(&[&[-1, -1, -1], &[3, -1, -1], &[-1, 3, -1], &[-1, -1, 3], &[1, 1, 0]]).unwrap();
        let b = p.barycenter();
        for (i, bi) in b.iter().enumerate() {
            assert_eq!(*bi, crate::oracle::coordinate_mean(&p, i));
        }
    }
}
