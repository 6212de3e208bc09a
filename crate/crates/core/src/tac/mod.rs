//! Separable nonlinear least squares by grid refinement.
//!
//! The model is linear in some coefficients once the remaining nonlinear
//! parameters are fixed. Every node of a Cartesian grid over the nonlinear
//! parameters gets an exact linear least-squares solve; the grid then
//! contracts around the winning node, which stays a node of the next level.
//! Several minima of the first, coarse level are refined independently so a
//! coarse grid that misses the global basin still has a chance to reach it.

pub mod demand;
pub mod expar;
pub mod linalg;

use rayon::prelude::*;

use crate::error::{FitError, Result};
use crate::scalar::Scalar;
use linalg::least_squares;

pub const DEFAULT_POINTS: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const SHRINK_FACTOR: f64 = 4.0;
const MAX_LEVELS: usize = 200;
/// Largest number of first-level minima refined independently.
pub const MAX_STARTS: usize = 8;

/// Search interval and resolution of one nonlinear parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis<T> {
    pub name: String,
    pub lo: T,
    pub hi: T,
    pub points: usize,
}

impl<T: Scalar> GridAxis<T> {
    pub fn new(name: impl Into<String>, lo: T, hi: T) -> Self {
        GridAxis {
            name: name.into(),
            lo,
            hi,
            points: DEFAULT_POINTS,
        }
    }

    pub fn with_points(mut self, points: usize) -> Self {
        self.points = points;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(FitError::InvalidGrid(format!(
                "axis `{}` needs finite lo < hi",
                self.name
            )));
        }
        if self.points < 2 {
            return Err(FitError::InvalidGrid(format!(
                "axis `{}` needs at least 2 points",
                self.name
            )));
        }
        Ok(())
    }
}

/// A family linear in its coefficients given the nonlinear parameters.
pub trait SeparablePattern<T: Scalar>: Sync {
    fn nonlinear_names(&self) -> Vec<String>;
    fn linear_names(&self) -> Vec<String>;
    fn response(&self) -> &[T];
    /// Design columns at `theta`, one per linear coefficient; `None` when
    /// the columns are not finite.
    fn design(&self, theta: &[T]) -> Option<Vec<Vec<T>>>;
}

/// Grid state after one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct Level<T> {
    pub rss: T,
    pub center: Vec<T>,
    pub widths: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFit<T> {
    pub nonlinear: Vec<T>,
    pub linear: Vec<T>,
    pub rss: T,
    /// `rss / n` with `n` the number of responses.
    pub mse: T,
    pub levels: Vec<Level<T>>,
    /// Grid nodes whose design was singular or non-finite.
    pub skipped_nodes: usize,
    pub evaluations: usize,
}

/// Nodes of one axis: `count` points spaced `step` apart containing
/// `center`, shifted by whole steps to stay inside `[lo, hi]`.
fn axis_nodes<T: Scalar>(center: T, step: T, count: usize, lo: T, hi: T) -> Vec<T> {
    let below = (count - 1) / 2;
    let mut first = below as i64;
    let room_below = ((center - lo) / step).floor().to_i64().unwrap_or(0).max(0);
    let room_above = ((hi - center) / step).floor().to_i64().unwrap_or(0).max(0);
    first = first.min(room_below);
    let last = (count as i64 - 1 - first).min(room_above);
    first = (count as i64 - 1 - last).min(room_below);
    (-first..=last)
        .map(|j| center + T::from_i64(j).unwrap() * step)
        .collect()
}

fn cartesian<T: Scalar>(axes: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut nodes = vec![Vec::new()];
    for axis in axes {
        nodes = nodes
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    nodes
}

type Solved<T> = Vec<Option<(Vec<T>, T)>>;

fn solve_nodes<T: Scalar, P: SeparablePattern<T>>(pattern: &P, nodes: &[Vec<T>]) -> Solved<T> {
    let y = pattern.response();
    nodes
        .par_iter()
        .map(|theta| {
            let cols = pattern.design(theta)?;
            let ls = least_squares(&cols, y)?;
            Some((ls.coefficients, ls.rss))
        })
        .collect()
}

/// Indices of first-level nodes no worse than any solved axis neighbour,
/// best first, ties to the lower index.
fn grid_local_minima<T: Scalar>(solved: &Solved<T>, points: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; points.len()];
    for i in (0..points.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * points[i + 1];
    }
    let mut minima: Vec<(usize, T)> = solved
        .iter()
        .enumerate()
        .filter_map(|(idx, s)| {
            let rss = s.as_ref()?.1;
            let is_min = points.iter().zip(&strides).all(|(&count, &stride)| {
                let pos = (idx / stride) % count;
                let neighbour_ok = |j: usize| match &solved[j] {
                    Some((_, r)) => rss <= *r,
                    None => true,
                };
                (pos == 0 || neighbour_ok(idx - stride))
                    && (pos + 1 == count || neighbour_ok(idx + stride))
            });
            is_min.then_some((idx, rss))
        })
        .collect();
    minima.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    minima.into_iter().map(|(i, _)| i).collect()
}

struct Branch<T> {
    nonlinear: Vec<T>,
    linear: Vec<T>,
    rss: T,
    levels: Vec<Level<T>>,
    skipped: usize,
    evaluations: usize,
    on_edge: bool,
}

/// Contracts the grid around `center` until every width is below tolerance.
fn refine<T: Scalar, P: SeparablePattern<T>>(
    pattern: &P,
    axes: &[GridAxis<T>],
    tol: T,
    first: Level<T>,
    linear: Vec<T>,
) -> Branch<T> {
    let mut branch = Branch {
        nonlinear: first.center.clone(),
        linear,
        rss: first.rss,
        levels: vec![first],
        skipped: 0,
        evaluations: 0,
        on_edge: false,
    };
    for _ in 1..MAX_LEVELS {
        let last = branch.levels.last().unwrap();
        let converged = last
            .widths
            .iter()
            .zip(&last.center)
            .all(|(&w, &c)| w < tol * (T::one() + c.abs()));
        if converged {
            break;
        }
        // A winner on the edge of its window (but inside the box) recentres
        // at the same widths instead of contracting.
        let widths: Vec<T> = if branch.on_edge {
            last.widths.clone()
        } else {
            last.widths.iter().map(|&w| w / T::lit(SHRINK_FACTOR)).collect()
        };
        let node_axes: Vec<Vec<T>> = axes
            .iter()
            .zip(&widths)
            .zip(&last.center)
            .map(|((a, &w), &c)| {
                let step = w / T::from_usize_lossy(a.points - 1);
                axis_nodes(c, step, a.points, a.lo, a.hi)
            })
            .collect();
        let nodes = cartesian(&node_axes);
        let solved = solve_nodes(pattern, &nodes);
        branch.evaluations += nodes.len();
        branch.skipped += solved.iter().filter(|s| s.is_none()).count();
        // The previous centre is a node, so the winner never loses ground.
        let (idx, coeffs, rss) = argmin(solved).expect("previous centre is solvable");
        branch.on_edge = axes.iter().zip(&node_axes).zip(&nodes[idx]).any(|((a, ax), &v)| {
            let at_window_edge = v == ax[0] || v == ax[ax.len() - 1];
            at_window_edge && v != a.lo && v != a.hi && rss < branch.rss
        });
        branch.nonlinear = nodes[idx].clone();
        branch.linear = coeffs;
        branch.rss = rss;
        branch.levels.push(Level {
            rss,
            center: nodes[idx].clone(),
            widths,
        });
    }
    branch
}

fn argmin<T: Scalar>(solved: Solved<T>) -> Option<(usize, Vec<T>, T)> {
    solved
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|(c, r)| (i, c, r)))
        .fold(None, |acc: Option<(usize, Vec<T>, T)>, cur| match acc {
            Some(a) if a.2 <= cur.2 => Some(a),
            _ => Some(cur),
        })
}

/// Fits `pattern` by refining the grid until every interval width is below
/// `tol * (1 + |center|)`.
///
/// The first level covers the whole box. Each of its best grid-local minima
/// (at most [`MAX_STARTS`]) is refined separately and the lowest final RSS
/// wins, ties to the better starting node.
pub fn fit_separable<T: Scalar, P: SeparablePattern<T>>(
    pattern: &P,
    axes: &[GridAxis<T>],
    tol: T,
) -> Result<SeparableFit<T>> {
    if axes.is_empty() {
        return Err(FitError::InvalidGrid("no nonlinear parameters".into()));
    }
    for a in axes {
        a.validate()?;
    }
    if !(tol > T::zero()) {
        return Err(FitError::InvalidGrid("tolerance must be positive".into()));
    }
    let n = T::from_usize_lossy(pattern.response().len());

    let widths: Vec<T> = axes.iter().map(|a| a.hi - a.lo).collect();
    let node_axes: Vec<Vec<T>> = axes
        .iter()
        .map(|a| {
            let step = (a.hi - a.lo) / T::from_usize_lossy(a.points - 1);
            (0..a.points)
                .map(|j| a.lo + T::from_usize_lossy(j) * step)
                .collect()
        })
        .collect();
    let nodes = cartesian(&node_axes);
    let solved = solve_nodes(pattern, &nodes);
    let mut skipped = solved.iter().filter(|s| s.is_none()).count();
    let mut evaluations = nodes.len();

    let points: Vec<usize> = axes.iter().map(|a| a.points).collect();
    let starts = grid_local_minima(&solved, &points);
    if starts.is_empty() {
        return Err(FitError::RankDeficient);
    }
    let mut best: Option<Branch<T>> = None;
    for &idx in starts.iter().take(MAX_STARTS) {
        let (coeffs, rss) = solved[idx].clone().expect("minima are solved nodes");
        let first = Level {
            rss,
            center: nodes[idx].clone(),
            widths: widths.clone(),
        };
        let branch = refine(pattern, axes, tol, first, coeffs);
        skipped += branch.skipped;
        evaluations += branch.evaluations;
        if best.as_ref().is_none_or(|b| branch.rss < b.rss) {
            best = Some(branch);
        }
    }
    let best = best.expect("at least one start");
    Ok(SeparableFit {
        nonlinear: best.nonlinear,
        linear: best.linear,
        rss: best.rss,
        mse: best.rss / n,
        levels: best.levels,
        skipped_nodes: skipped,
        evaluations,
    })
}

/// The single-rate decay pattern `y = a*exp(d*x) + b`.
#[derive(Debug, Clone)]
pub struct ExpDecayPattern<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> SeparablePattern<T> for ExpDecayPattern<T> {
    fn nonlinear_names(&self) -> Vec<String> {
        vec!["d".into()]
    }

    fn linear_names(&self) -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    fn response(&self) -> &[T] {
        &self.y
    }

    fn design(&self, theta: &[T]) -> Option<Vec<Vec<T>>> {
        let e: Vec<T> = self.x.iter().map(|&x| (theta[0] * x).exp()).collect();
        if e.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(vec![e, vec![T::one(); self.x.len()]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_nodes_keep_center_and_box() {
        let nodes = axis_nodes(0.5, 0.1, 10, 0.0, 1.0);
        assert_eq!(nodes.len(), 10);
        assert!(nodes.contains(&0.5));
        let nodes = axis_nodes(0.05, 0.1, 10, 0.0, 1.0);
        assert_eq!(nodes[0], 0.05);
        assert_eq!(nodes.len(), 10);
        let nodes = axis_nodes(0.98, 0.1, 10, 0.0, 1.0);
        assert_eq!(*nodes.last().unwrap(), 0.98);
        assert!(nodes[0] >= 0.0);
    }

    #[test]
    fn exact_recovery_on_grid_node() {
        let x: Vec<f64> = (0..15).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * (-0.5 * v).exp() + 1.0).collect();
        let p = ExpDecayPattern { x, y };
        // -0.5 is the seventh node of ten on [-2, 0.25].
        let fit = fit_separable(&p, &[GridAxis::new("d", -2.0, 0.25)], 1e-7).unwrap();
        assert!(fit.rss <= 1e-20);
        assert!((fit.nonlinear[0] + 0.5).abs() < 1e-12);
        assert!((fit.linear[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rss_is_monotone() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| 1.7 * (-0.83 * v).exp() + 0.2 + 0.01 * ((i * 7 % 5) as f64 - 2.0))
            .collect();
        let fit = fit_separable(&ExpDecayPattern { x, y }, &[GridAxis::new("d", -3.0, -0.01)], 1e-9)
            .unwrap();
        for w in fit.levels.windows(2) {
            assert!(w[1].rss <= w[0].rss);
        }
    }

    #[test]
    fn invalid_grid() {
        let p = ExpDecayPattern {
            x: vec![0.0, 1.0, 2.0],
            y: vec![1.0, 0.5, 0.2],
        };
        assert!(fit_separable(&p, &[GridAxis::new("d", 1.0, 1.0)], 1e-7).is_err());
        assert!(fit_separable(&p, &[GridAxis::new("d", -1.0, 0.0).with_points(1)], 1e-7).is_err());
    }
}
