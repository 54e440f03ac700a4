use serde::Serialize;

use super::examples::ProbePoints;
use crate::rotation_theory::{proximality_scan, ProximityReport};
use crate::torus_maps::TorusMap;

/// Proximality evidence for a pair of points.
#[derive(Clone, Debug, Serialize)]
pub struct PairEvidence {
    pub points: [[f64; 2]; 2],
    pub scan: ProximityReport,
    pub threshold: f64,
    pub forward_proximal: bool,
    pub backward_proximal: bool,
    pub interpretation: String,
}

impl PairEvidence {
    pub fn equivalent(&self) -> bool {
        self.points[0] == self.points[1] || self.forward_proximal || self.backward_proximal
    }
}

/// Scans a pair in both time directions. A minimum below `threshold` is
/// read as proximality, which forces Kronecker equivalence.
pub fn kronecker_separation_probe(map: &TorusMap, w0: [f64; 2], w1: [f64; 2], n_max: usize, threshold: f64) -> PairEvidence {
    let scan = proximality_scan(map, w0, w1, n_max);
    let forward_proximal = scan.forward_min < threshold;
    let backward_proximal = scan.backward_min < threshold;
    let interpretation = if w0 == w1 {
        "identical points: trivially Kronecker equivalent".to_string()
    } else {
        match (forward_proximal, backward_proximal) {
            (true, true) => "proximal in both directions: Kronecker equivalent".into(),
            (true, false) => format!("forward proximal (n = {}): Kronecker equivalent", scan.forward_argmin),
            (false, true) => format!("backward proximal (n = {}): Kronecker equivalent", scan.backward_argmin),
            (false, false) => format!("no proximality below {threshold} up to n = {n_max}: no evidence"),
        }
    };
    PairEvidence { points: [w0, w1], scan, threshold, forward_proximal, backward_proximal, interpretation }
}

/// Evidence that `f` has no irrational circle factor: `w₀` is forward
/// proximal to `w₁′`, backward proximal to `w₀′`, while `w₀′` and `w₁′`
/// are Kronecker separated by construction.
#[derive(Clone, Debug, Serialize)]
pub struct ObstructionEvidence {
    pub forward_pair: PairEvidence,
    pub backward_pair: PairEvidence,
    pub endpoints_separated: bool,
    pub obstruction: bool,
    pub interpretation: String,
}

pub fn factor_obstruction(
    map: &TorusMap,
    probes: &ProbePoints,
    n_max: usize,
    threshold: f64,
    endpoints_separated: bool,
) -> ObstructionEvidence {
    let forward_pair = kronecker_separation_probe(map, probes.w0, probes.w1_end, n_max, threshold);
    let backward_pair = kronecker_separation_probe(map, probes.w0, probes.w0_end, n_max, threshold);
    let obstruction = forward_pair.forward_proximal && backward_pair.backward_proximal && endpoints_separated;
    let interpretation = if obstruction {
        "factor obstruction evidence: w0 is forward proximal to w1' and backward proximal to w0', \
         which are Kronecker separated"
            .to_string()
    } else if !endpoints_separated {
        "endpoints not certified separated: no obstruction claimed".to_string()
    } else {
        "required proximality not observed: no obstruction claimed".to_string()
    };
    ObstructionEvidence { forward_pair, backward_pair, endpoints_separated, obstruction, interpretation }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GOLDEN, SILVER};

    #[test]
    fn identical_points_are_equivalent() {
        let e = kronecker_separation_probe(&TorusMap::rigid(GOLDEN, SILVER), [0.2, 0.3], [0.2, 0.3], 10, 1e-2);
        assert!(e.equivalent());
        assert!(e.interpretation.contains("trivially"));
    }

    #[test]
    fn rigid_rotation_is_isometric() {
        let (a, b) = ([0.1, 0.1], [0.1, 0.35]);
        let e = kronecker_separation_probe(&TorusMap::rigid(GOLDEN, SILVER), a, b, 1000, 1e-2);
        assert!((e.scan.forward_min - 0.25).abs() < 1e-9);
        assert!((e.scan.backward_min - 0.25).abs() < 1e-9);
        assert!(!e.equivalent());
        assert!(e.interpretation.contains("no evidence"));
    }
}
