//! Separation oracle for the path-length constraints.
//!
//! Given a candidate perturbation, the oracle finds the shortest `s`→`t`
//! path other than the protected path `pstar` and reports it if it is
//! shorter than `ℓ + δ`, where `ℓ` is the unperturbed length of `pstar`.
//! Because it is the shortest such path, it is the most violated
//! constraint.

use crate::error::{Error, Result};
use crate::graph::{
    check_delta_len, dijkstra, path_length, second_shortest_excluding, Graph, Path,
    PerturbationVector,
};

/// Default absolute slack on oracle length comparisons.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub path: Option<Path>,
    /// Perturbed length of `path`, or infinity when no path is reported.
    pub perturbed_length: f64,
}

impl OracleResult {
    fn empty() -> Self {
        OracleResult {
            path: None,
            perturbed_length: f64::INFINITY,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_none()
    }
}

/// Fails if `delta` touches any edge of `pstar`.
pub(crate) fn check_protected(pstar: &Path, delta: &PerturbationVector) -> Result<()> {
    for &e in pstar.edge_ids() {
        let value = delta.get(e);
        if value != 0.0 {
            return Err(Error::ProtectedEdgePerturbed { edge: e, value });
        }
    }
    Ok(())
}

/// Returns the most violated constraint at `delta`, or an empty result when
/// every other simple `s`→`t` path has perturbed length at least
/// `ℓ + buffer - eps`.
pub fn constraint_oracle(
    g: &Graph,
    delta: &PerturbationVector,
    pstar: &Path,
    buffer: f64,
    eps: f64,
) -> Result<OracleResult> {
    if !(buffer >= 0.0 && buffer.is_finite()) {
        return Err(Error::arg(format!("buffer must be >= 0, got {buffer}")));
    }
    pstar.check_in(g)?;
    check_delta_len(g, delta)?;
    check_protected(pstar, delta)?;

    let ell = path_length(g, pstar, None)?;
    let (s, t) = (pstar.source(), pstar.target());
    let mut p = dijkstra(g, s, t, Some(delta))?;
    if p.as_ref() == Some(pstar) {
        p = second_shortest_excluding(g, pstar, Some(delta))?;
    }
    let Some(p) = p else {
        return Ok(OracleResult::empty());
    };
    let len = path_length(g, &p, Some(delta))?;
    if len >= ell + buffer - eps {
        return Ok(OracleResult::empty());
    }
    Ok(OracleResult {
        path: Some(p),
        perturbed_length: len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeId, NodeId};

    fn triangle() -> Graph {
        // s=0, a=1, t=2; s-t is e0
        Graph::from_edges(3, [(0, 2, 1.0), (0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn direct_edge_is_reported() {
        let g = triangle();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        let r = constraint_oracle(&g, &PerturbationVector::zeros(3), &pstar, 1.0, DEFAULT_EPS).unwrap();
        let p = r.path.unwrap();
        assert_eq!(p.nodes(), &[NodeId(0), NodeId(2)]);
        assert_eq!(r.perturbed_length, 1.0);
    }

    #[test]
    fn threshold_met_exactly_is_empty() {
        let g = triangle();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        let d = PerturbationVector::from_vec(vec![2.0, 0.0, 0.0]).unwrap();
        let r = constraint_oracle(&g, &d, &pstar, 1.0, DEFAULT_EPS).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.perturbed_length, f64::INFINITY);
    }

    #[test]
    fn unique_route_is_never_violated() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        for buffer in [0.0, 1.0, 1e6] {
            let r = constraint_oracle(&g, &PerturbationVector::zeros(2), &pstar, buffer, DEFAULT_EPS)
                .unwrap();
            assert!(r.is_empty());
        }
    }

    #[test]
    fn shortest_equal_to_pstar_falls_back_to_second() {
        let g = triangle();
        // Make pstar [s,a,t] shortest (length 2) with s-t at 1.5: second is s-t.
        let d = PerturbationVector::from_vec(vec![0.5, 0.0, 0.0]).unwrap();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        let r = constraint_oracle(&g, &d, &pstar, 1.0, DEFAULT_EPS).unwrap();
        assert_eq!(r.path.unwrap().nodes(), &[NodeId(0), NodeId(2)]);
        assert_eq!(r.perturbed_length, 1.5);
    }

    #[test]
    fn perturbed_protected_edge_is_an_error() {
        let g = triangle();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        let d = PerturbationVector::from_vec(vec![0.0, 1.0, 0.0]).unwrap();
        match constraint_oracle(&g, &d, &pstar, 1.0, DEFAULT_EPS) {
            Err(Error::ProtectedEdgePerturbed { edge, value }) => {
                assert_eq!(edge, EdgeId(1));
                assert_eq!(value, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argument_errors() {
        let g = triangle();
        let pstar = Path::from_indices(&g, &[0, 1, 2]).unwrap();
        assert!(constraint_oracle(&g, &PerturbationVector::zeros(2), &pstar, 1.0, DEFAULT_EPS).is_err());
        assert!(constraint_oracle(&g, &PerturbationVector::zeros(3), &pstar, -1.0, DEFAULT_EPS).is_err());
    }
}
