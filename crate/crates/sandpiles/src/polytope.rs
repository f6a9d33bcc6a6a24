//! Constructive convex decomposition of SR states on complete graphs into
//! DR states, with independently checkable certificates and lattice-point
//! membership for the DR polytope.

use std::collections::{BTreeMap, HashMap};

use num::bigint::BigInt;
use num::{One, Zero};

use crate::dynamics::{BigRational, Configuration};
use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::recurrence::{dhar_burning, is_dr_complete, is_sr_complete, stochastic_burning};

/// An exact convex combination of DR states equal to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionCertificate {
    pub target: Configuration,
    /// `(weight, state)` pairs, sorted lexicographically by state; weights
    /// are strictly positive and sum to 1.
    pub components: Vec<(BigRational, Configuration)>,
}

impl DecompositionCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "target": self.target,
            "components": self
                .components
                .iter()
                .map(|(w, s)| {
                    serde_json::json!({
                        "weight": format!("{}/{}", w.numer(), w.denom()),
                        "state": s,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidInput(format!("bad certificate JSON: {msg}"));
        let target: Configuration = serde_json::from_value(
            value.get("target").ok_or_else(|| bad("missing target"))?.clone(),
        )
        .map_err(|e| bad(&e.to_string()))?;
        let raw = value
            .get("components")
            .and_then(|v| v.as_array())
            .ok_or_else(|| bad("missing components"))?;
        let mut components = Vec::with_capacity(raw.len());
        for entry in raw {
            let weight_str = entry
                .get("weight")
                .and_then(|v| v.as_str())
                .ok_or_else(|| bad("missing weight"))?;
            let (num, den) = weight_str
                .split_once('/')
                .ok_or_else(|| bad("weight must be num/den"))?;
            let num: BigInt = num.parse().map_err(|_| bad("bad numerator"))?;
            let den: BigInt = den.parse().map_err(|_| bad("bad denominator"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            let state: Configuration = serde_json::from_value(
                entry.get("state").ok_or_else(|| bad("missing state"))?.clone(),
            )
            .map_err(|e| bad(&e.to_string()))?;
            components.push((BigRational::new(num, den), state));
        }
        Ok(DecompositionCertificate { target, components })
    }
}

fn check_stable_complete(c: &[u32]) -> Result<()> {
    let n = c.len();
    for (idx, &x) in c.iter().enumerate() {
        if x as usize >= n {
            return Err(Error::NotStable {
                vertex: idx + 1,
                grains: x,
                degree: n as u32,
            });
        }
    }
    Ok(())
}

fn require_sr(c: &[u32]) -> Result<()> {
    let (unburned, report) = stochastic_burning(c)?;
    if unburned > 0 {
        return Err(Error::NotSr {
            unburned,
            remain: report.remain,
        });
    }
    Ok(())
}

/// One step of the superstable reduction: moves a grain between the two
/// (lowest-index) maximal coordinates in both directions and returns the
/// exact weight pair recombining to `c`.
#[allow(clippy::type_complexity)]
pub fn split_superstable(
    c: &[u32],
) -> Result<(Configuration, Configuration, (BigRational, BigRational))> {
    let n = c.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "superstable split needs n >= 3, got {n}"
        )));
    }
    require_sr(c)?;
    if c.iter().any(|&x| x as usize + 1 >= n) {
        return Err(Error::NotSuperstable);
    }
    let max_val = *c.iter().max().unwrap();
    let max_idx = c.iter().position(|&x| x == max_val).unwrap();
    let next_val = c
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != max_idx)
        .map(|(_, &x)| x)
        .max()
        .unwrap();
    let next_idx = c
        .iter()
        .enumerate()
        .position(|(i, &x)| i != max_idx && x == next_val)
        .unwrap();
    let k = max_val - next_val + 1;

    let mut c1 = c.to_vec();
    c1[max_idx] += 1;
    c1[next_idx] -= 1;
    let mut c2 = c1.clone();
    c2.swap(max_idx, next_idx);

    let kq = BigInt::from(k);
    let weights = (
        BigRational::new(kq.clone(), kq.clone() + 1),
        BigRational::new(BigInt::one(), kq + 1),
    );
    debug_assert!(is_sr_complete(&c1)? && is_sr_complete(&c2)?);
    Ok((c1, c2, weights))
}

/// Memoizing decomposition engine over `(n, configuration)` subproblems.
#[derive(Default)]
struct Decomposer {
    cache: HashMap<Configuration, Vec<(BigRational, Configuration)>>,
}

impl Decomposer {
    fn run(&mut self, c: &[u32]) -> Result<Vec<(BigRational, Configuration)>> {
        if let Some(hit) = self.cache.get(c) {
            return Ok(hit.clone());
        }
        let n = c.len();
        let components = if n <= 2 || is_dr_complete(c)? {
            vec![(BigRational::one(), c.to_vec())]
        } else if c.iter().all(|&x| (x as usize) + 1 < n) {
            let (c1, c2, (w1, w2)) = split_superstable(c)?;
            let mut merged: BTreeMap<Configuration, BigRational> = BTreeMap::new();
            for (branch, w) in [(c1, w1), (c2, w2)] {
                for (bw, state) in self.run(&branch)? {
                    let entry = merged.entry(state).or_insert_with(BigRational::zero);
                    *entry += &w * bw;
                }
            }
            merged
                .into_iter()
                .filter(|(_, w)| !w.is_zero())
                .map(|(s, w)| (w, s))
                .collect()
        } else {
            // some coordinate is maximal (n-1) but c is not DR: sort, peel
            // off the large tail, and recurse on the prefix
            let mut perm: Vec<usize> = (0..n).collect();
            perm.sort_by_key(|&i| c[i]);
            let sorted: Vec<u32> = perm.iter().map(|&i| c[i]).collect();
            let j = (1..=n)
                .rev()
                .find(|&i| (sorted[i - 1] as usize) < i - 1)
                .expect("a non-DR state violates the staircase somewhere");
            let prefix = &sorted[..j];
            let tail = &sorted[j..];
            debug_assert!(tail.iter().enumerate().all(|(t, &x)| x as usize >= j + t));
            let inner = self.run(prefix)?;
            inner
                .into_iter()
                .map(|(w, mut state)| {
                    state.extend_from_slice(tail);
                    let mut unsorted = vec![0u32; n];
                    for (pos, &orig) in perm.iter().enumerate() {
                        unsorted[orig] = state[pos];
                    }
                    (w, unsorted)
                })
                .collect()
        };
        let mut components = components;
        components.sort_by(|a, b| a.1.cmp(&b.1));
        self.cache.insert(c.to_vec(), components.clone());
        Ok(components)
    }
}

/// Decomposes a stable SR state of `K_n` into an exact convex combination
/// of DR states; non-SR inputs fail with a burning witness.
pub fn decompose(c: &[u32]) -> Result<DecompositionCertificate> {
    check_stable_complete(c)?;
    require_sr(c)?;
    let components = Decomposer::default().run(c)?;
    let cert = DecompositionCertificate {
        target: c.to_vec(),
        components,
    };
    debug_assert!(verify_certificate(&cert).ok);
    Ok(cert)
}

/// Outcome of the independent certificate check.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub failures: Vec<String>,
}

/// Re-checks a certificate from scratch: positive weights summing to 1,
/// every component DR (by burning on `K_n`, not the fast path), and exact
/// coordinate-wise reconstruction of the target. Never errors.
pub fn verify_certificate(cert: &DecompositionCertificate) -> VerificationReport {
    let mut failures = Vec::new();
    let n = cert.target.len();
    if cert.components.is_empty() {
        failures.push("certificate has no components".to_string());
    }
    let graph = Multigraph::complete(n.max(1)).ok();
    let mut weight_sum = BigRational::zero();
    let mut reconstruction = vec![BigRational::zero(); n];
    for (idx, (w, state)) in cert.components.iter().enumerate() {
        if w <= &BigRational::zero() {
            failures.push(format!("component {idx}: weight {w} is not positive"));
        }
        weight_sum += w;
        if state.len() != n {
            failures.push(format!(
                "component {idx}: state length {} != target length {n}",
                state.len()
            ));
            continue;
        }
        let dr = graph
            .as_ref()
            .and_then(|g| dhar_burning(g, state).ok())
            .map(|report| report.remain.is_empty());
        match dr {
            Some(true) => {}
            _ => failures.push(format!("component {idx}: state {state:?} is not DR")),
        }
        for (slot, &x) in state.iter().enumerate() {
            reconstruction[slot] += w * BigRational::from(BigInt::from(x));
        }
    }
    if !weight_sum.is_one() {
        failures.push(format!("weights sum to {weight_sum}, expected 1"));
    }
    for (slot, value) in reconstruction.iter().enumerate() {
        let want = BigRational::from(BigInt::from(cert.target[slot]));
        if failures.iter().any(|f| f.contains("length")) {
            break;
        }
        if value != &want {
            failures.push(format!(
                "coordinate {}: components combine to {value}, target has {want}",
                slot + 1
            ));
        }
    }
    VerificationReport {
        ok: failures.is_empty(),
        failures,
    }
}

/// Whether an integer point lies in the DR polytope of `K_n` (the convex
/// hull of the DR states). Membership is decided constructively: a
/// bounding-box test, then the decomposition.
pub fn is_in_dr_polytope(n: usize, point: &[i64]) -> Result<bool> {
    if point.len() != n {
        return Err(Error::LengthMismatch {
            got: point.len(),
            expected: n,
        });
    }
    if point.iter().any(|&x| x < 0 || x as usize >= n) {
        return Ok(false);
    }
    let c: Configuration = point.iter().map(|&x| x as u32).collect();
    match decompose(&c) {
        Ok(_) => Ok(true),
        Err(Error::NotSr { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Decomposition with the fixed-level postcondition checked: every
/// component has the same level as the target.
pub fn decompose_level_restricted(c: &[u32]) -> Result<DecompositionCertificate> {
    let cert = decompose(c)?;
    let n = c.len();
    let g = Multigraph::complete(n)?;
    let target_level = crate::dynamics::level(&g, c)?;
    for (_, state) in &cert.components {
        let lvl = crate::dynamics::level(&g, state)?;
        if lvl != target_level {
            return Err(Error::InvalidInput(format!(
                "internal: component {state:?} has level {lvl}, target has {target_level}"
            )));
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::level;
    use crate::enumeration::{count_forests, enumerate_minimal, enumerate_sr, Model};
    use num::bigint::BigUint;

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    #[test]
    fn split_examples() {
        let (c1, c2, (w1, w2)) = split_superstable(&[1, 1, 1]).unwrap();
        assert_eq!(c1, vec![2, 0, 1]);
        assert_eq!(c2, vec![0, 2, 1]);
        assert_eq!(w1, half());
        assert_eq!(w2, half());

        let (c1, c2, _) = split_superstable(&[2, 2, 1, 1]).unwrap();
        assert_eq!(c1, vec![3, 1, 1, 1]);
        assert_eq!(c2, vec![1, 3, 1, 1]);

        // level preservation
        let g = Multigraph::complete(4).unwrap();
        for c in [[2u32, 2, 1, 1], [1, 2, 2, 1]] {
            let (a, b, _) = split_superstable(&c).unwrap();
            assert_eq!(level(&g, &a).unwrap(), level(&g, &c).unwrap());
            assert_eq!(level(&g, &b).unwrap(), level(&g, &c).unwrap());
        }

        assert!(matches!(
            split_superstable(&[0, 1, 2]),
            Err(Error::NotSuperstable)
        ));
        assert!(matches!(
            split_superstable(&[0, 0, 1]),
            Err(Error::NotSr { .. })
        ));
        assert!(split_superstable(&[0, 1]).is_err());
    }

    #[test]
    fn split_recombines_exactly() {
        for c in [[2u32, 2, 1, 1], [2, 1, 1, 2], [1, 2, 2, 1]] {
            let (a, b, (wa, wb)) = split_superstable(&c).unwrap();
            for slot in 0..4 {
                let got = &wa * BigRational::from(BigInt::from(a[slot]))
                    + &wb * BigRational::from(BigInt::from(b[slot]));
                assert_eq!(got, BigRational::from(BigInt::from(c[slot])));
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let cert = decompose(&[1, 1, 1]).unwrap();
        assert_eq!(
            cert.components,
            vec![(half(), vec![0, 2, 1]), (half(), vec![2, 0, 1])]
        );

        let cert = decompose(&[0, 1, 2]).unwrap();
        assert_eq!(cert.components, vec![(BigRational::one(), vec![0, 1, 2])]);

        let cert = decompose(&[0, 2, 2, 2]).unwrap();
        assert!(verify_certificate(&cert).ok);
        let g = Multigraph::complete(4).unwrap();
        for (_, state) in &cert.components {
            assert_eq!(level(&g, state).unwrap(), 0);
            let mut sorted = state.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn decompose_rejects_non_sr() {
        match decompose(&[0, 0, 2]) {
            Err(Error::NotSr { unburned, remain }) => {
                // total mass 2 < 3 edges, so not even the largest vertex burns
                assert_eq!(unburned, 3);
                assert_eq!(remain, vec![1, 2, 3]);
            }
            other => panic!("expected NotSr, got {other:?}"),
        }
        assert!(matches!(decompose(&[3, 0, 0]), Err(Error::NotStable { .. })));
    }

    #[test]
    fn every_sr_state_decomposes_and_verifies() {
        for n in 1..=5 {
            for state in enumerate_sr(n).unwrap().states.unwrap() {
                let cert = decompose(&state).unwrap();
                let report = verify_certificate(&cert);
                assert!(report.ok, "state {state:?}: {:?}", report.failures);
            }
        }
    }

    #[test]
    fn verifier_catches_tampering() {
        let mut cert = decompose(&[1, 1, 1]).unwrap();
        cert.components[0].0 = BigRational::new(BigInt::from(1), BigInt::from(3));
        let report = verify_certificate(&cert);
        assert!(!report.ok);
        assert!(report.failures.iter().any(|f| f.contains("sum")));

        let mut cert = decompose(&[1, 1, 1]).unwrap();
        cert.components[0].1 = vec![1, 1, 1];
        let report = verify_certificate(&cert);
        assert!(!report.ok);
        assert!(report.failures.iter().any(|f| f.contains("not DR")));

        let mut cert = decompose(&[0, 1, 2]).unwrap();
        cert.target = vec![1, 1, 1];
        assert!(!verify_certificate(&cert).ok);
    }

    #[test]
    fn polytope_membership() {
        assert!(!is_in_dr_polytope(3, &[0, 0, 2]).unwrap());
        assert!(!is_in_dr_polytope(3, &[-1, 1, 1]).unwrap());
        assert!(!is_in_dr_polytope(3, &[3, 0, 0]).unwrap());
        assert!(is_in_dr_polytope(3, &[1, 1, 1]).unwrap());
        assert!(is_in_dr_polytope(3, &[7, 7]).is_err());
        // full sweep at n = 3: exactly the 17 SR states are members
        let sr = enumerate_sr(3).unwrap().states.unwrap();
        let mut members = Vec::new();
        for a in 0..3i64 {
            for b in 0..3i64 {
                for c in 0..3i64 {
                    if is_in_dr_polytope(3, &[a, b, c]).unwrap() {
                        members.push(vec![a as u32, b as u32, c as u32]);
                    }
                }
            }
        }
        assert_eq!(members, sr);
        for state in enumerate_sr(4).unwrap().states.unwrap() {
            let point: Vec<i64> = state.iter().map(|&x| x as i64).collect();
            assert!(is_in_dr_polytope(4, &point).unwrap());
        }
    }

    #[test]
    fn level_restriction() {
        let cert = decompose_level_restricted(&[1, 1, 1]).unwrap();
        let perms: Vec<Vec<u32>> = cert.components.iter().map(|(_, s)| s.clone()).collect();
        for p in &perms {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2]);
        }

        for state in enumerate_minimal(4, Model::Sr).unwrap().states.unwrap() {
            let cert = decompose_level_restricted(&state).unwrap();
            for (_, comp) in &cert.components {
                let mut sorted = comp.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, vec![0, 1, 2, 3]);
            }
        }

        let g = Multigraph::complete(3).unwrap();
        for state in enumerate_sr(3).unwrap().states.unwrap() {
            let cert = decompose_level_restricted(&state).unwrap();
            let want = level(&g, &state).unwrap();
            for (_, comp) in &cert.components {
                assert_eq!(level(&g, comp).unwrap(), want);
            }
        }
    }

    #[test]
    fn level_zero_lattice_points_match_forests() {
        for n in 1..=5 {
            let minimal = enumerate_minimal(n, Model::Sr).unwrap().count;
            assert_eq!(BigUint::from(minimal), count_forests(n).unwrap());
        }
    }

    #[test]
    fn permutation_equivariance() {
        let base = [0u32, 2, 2, 2];
        let cert = decompose(&base).unwrap();
        // a transposition of coordinates 1 and 4
        let sigma = [3usize, 1, 2, 0];
        let permuted: Vec<u32> = sigma.iter().map(|&i| base[i]).collect();
        let cert_p = decompose(&permuted).unwrap();
        assert!(verify_certificate(&cert_p).ok);
        let mapped = DecompositionCertificate {
            target: permuted,
            components: cert
                .components
                .iter()
                .map(|(w, s)| (w.clone(), sigma.iter().map(|&i| s[i]).collect()))
                .collect(),
        };
        assert!(verify_certificate(&mapped).ok);
    }

    #[test]
    fn certificate_json_roundtrip() {
        let cert = decompose(&[1, 1, 1]).unwrap();
        let json = cert.to_json();
        assert_eq!(json["components"][0]["weight"], "1/2");
        let back = DecompositionCertificate::from_json(&json).unwrap();
        assert_eq!(back, cert);
        assert!(DecompositionCertificate::from_json(&serde_json::json!({})).is_err());
    }
}
