//! Fidelity and Bell/Mermin-type estimators built from stabilizer
//! expectations.
//!
//! Uncertainties treat every setting as an independent binomial sample:
//! `var<g> = (1 - <g>^2) / N` per setting, added in quadrature for sums.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::counts::{Estimate, OutcomeTable, OutcomeWeight};
use super::graph::Graph;
use super::group::StabilizerGroup;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};

/// Largest register for which local-hidden-variable bounds are enumerated.
pub const MAX_LHV_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult {
    pub value: f64,
    pub error: f64,
    /// `F > 1/2`, which certifies genuine multipartite entanglement.
    pub witness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminResult {
    pub name: String,
    pub value: f64,
    pub error: f64,
    pub classical_bound: f64,
    pub quantum_bound: f64,
    /// Signed Pauli operators summed to form the value.
    pub terms: Vec<String>,
}

impl MerminResult {
    pub fn violates_classical(&self) -> bool {
        self.value.abs() > self.classical_bound
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MerminSummary {
    pub variants: Vec<MerminResult>,
    /// Index of the largest value among variants whose classical bound is 2.
    pub optimum: Option<usize>,
}

impl MerminSummary {
    pub fn best(&self) -> Option<&MerminResult> {
        self.optimum.map(|i| &self.variants[i])
    }
}

/// A two-setting test: a sum of stabilizer-group elements given by their
/// generator masks.
#[derive(Debug, Clone, PartialEq)]
pub struct MerminVariant {
    pub name: String,
    pub masks: Vec<u32>,
    pub classical_bound: f64,
}

impl MerminVariant {
    pub fn quantum_bound(&self) -> f64 {
        self.masks.len() as f64
    }

    /// Whether the enumerated classical bound matches the nominal bound 2.
    pub fn is_valid(&self) -> bool {
        self.classical_bound <= 2.0 + 1e-9
    }
}

/// Reads every group element's expectation from a counts table.
pub fn estimates_from_table<T: OutcomeWeight>(group: &StabilizerGroup, table: &OutcomeTable<T>) -> Result<Vec<Estimate>> {
    group.elements().iter().map(|e| table.expectation(&e.pauli)).collect()
}

/// `F = 2^-n Σ_i <g_i>` over the whole group, identity included.
pub fn fidelity(expectations: &[Estimate]) -> FidelityResult {
    let k = expectations.len().max(1) as f64;
    let value = expectations.iter().map(|e| e.value).sum::<f64>() / k;
    let error = expectations.iter().map(|e| e.error * e.error).sum::<f64>().sqrt() / k;
    FidelityResult { value, error, witness: value > 0.5 }
}

fn check_len(group: &StabilizerGroup, estimates: &[Estimate]) -> Result<()> {
    if estimates.len() != group.elements().len() {
        return Err(Error::InvalidArgument(format!(
            "{} expectations for a group of {} elements",
            estimates.len(),
            group.elements().len()
        )));
    }
    Ok(())
}

fn combine(
    name: String,
    group: &StabilizerGroup,
    estimates: &[Estimate],
    masks: &[u32],
    classical_bound: f64,
) -> MerminResult {
    let value = masks.iter().map(|&m| estimates[m as usize].value).sum();
    let error = masks.iter().map(|&m| estimates[m as usize].error.powi(2)).sum::<f64>().sqrt();
    MerminResult {
        name,
        value,
        error,
        classical_bound,
        quantum_bound: masks.len() as f64,
        terms: masks.iter().map(|&m| group.element(m).pauli.to_string()).collect(),
    }
}

pub fn mermin_two_setting(
    group: &StabilizerGroup,
    estimates: &[Estimate],
    variant: &MerminVariant,
) -> Result<MerminResult> {
    check_len(group, estimates)?;
    if variant.masks.iter().any(|&m| m as usize >= estimates.len()) {
        return Err(Error::UnknownVariant(format!("{} does not fit this group", variant.name)));
    }
    Ok(combine(variant.name.clone(), group, estimates, &variant.masks, variant.classical_bound))
}

/// Evaluates every two-setting variant of `graph` and flags the optimum.
pub fn mermin_two_setting_all(
    graph: &Graph,
    group: &StabilizerGroup,
    estimates: &[Estimate],
) -> Result<MerminSummary> {
    let variants = mermin_variants(graph, group)?;
    let results = variants
        .iter()
        .map(|v| mermin_two_setting(group, estimates, v))
        .collect::<Result<Vec<_>>>()?;
    let optimum = results
        .iter()
        .enumerate()
        .filter(|(i, _)| variants[*i].is_valid())
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(i, _)| i);
    Ok(MerminSummary { variants: results, optimum })
}

/// Sum of all `2^n` stabilizer expectations; equals `2^n F`.
pub fn mermin_three_setting(group: &StabilizerGroup, estimates: &[Estimate]) -> Result<MerminResult> {
    check_len(group, estimates)?;
    let masks: Vec<u32> = (0..estimates.len() as u32).collect();
    let paulis: Vec<PauliString> = group.elements().iter().map(|e| e.pauli.clone()).collect();
    let bound = lhv_bound(&paulis)?;
    Ok(combine("MIII".into(), group, estimates, &masks, bound))
}

/// Two-qubit CHSH value `E(a,b) + E(a,b') + E(a',b) - E(a',b')`.
pub fn chsh(e_ab: Estimate, e_ab2: Estimate, e_a2b: Estimate, e_a2b2: Estimate) -> MerminResult {
    let all = [e_ab, e_ab2, e_a2b, e_a2b2];
    MerminResult {
        name: "CHSH".into(),
        value: e_ab.value + e_ab2.value + e_a2b.value - e_a2b2.value,
        error: all.iter().map(|e| e.error * e.error).sum::<f64>().sqrt(),
        classical_bound: 2.0,
        quantum_bound: 2.0 * SQRT_2,
        terms: vec!["E(a,b)".into(), "E(a,b')".into(), "E(a',b)".into(), "-E(a',b')".into()],
    }
}

/// Largest `|Σ_t <t>|` reachable by a deterministic local model assigning
/// each qubit fixed ±1 values for X, Y and Z.
pub fn lhv_bound(terms: &[PauliString]) -> Result<f64> {
    let n = terms.first().map_or(0, PauliString::len);
    if n > MAX_LHV_QUBITS {
        return Err(Error::GraphTooLarge(n));
    }
    let mut best = 0.0f64;
    for assignment in 0u32..(1 << (3 * n)) {
        let total: f64 = terms
            .iter()
            .map(|t| {
                let mut v = t.sign();
                for (q, &p) in t.letters().iter().enumerate() {
                    let slot = match p {
                        Pauli::I => continue,
                        Pauli::X => 0,
                        Pauli::Y => 1,
                        Pauli::Z => 2,
                    };
                    if assignment >> (3 * q + slot) & 1 == 1 {
                        v = -v;
                    }
                }
                v
            })
            .sum();
        best = best.max(total.abs());
    }
    Ok(best)
}

/// Sum-of-products expression over role indices; an empty product is `1`.
type Factor<'a> = &'a [&'a [usize]];

struct Builder<'a> {
    group: &'a StabilizerGroup,
    /// role index -> 0-based vertex
    roles: Vec<usize>,
    labels: &'a [usize],
}

impl Builder<'_> {
    fn name(&self, role: usize) -> String {
        format!("g{}", self.labels[self.roles[role]])
    }

    fn variant(&self, base: &str, factors: &[Factor], sub: Option<(usize, usize)>) -> Result<MerminVariant> {
        let bit = |role: usize| 1u32 << self.roles[role];
        let gen_mask = |role: usize| match sub {
            Some((from, extra)) if from == role => bit(role) ^ bit(extra),
            _ => bit(role),
        };
        let mut masks = vec![0u32];
        for factor in factors {
            let mut next = Vec::new();
            for m in &masks {
                for product in factor.iter() {
                    next.push(product.iter().fold(*m, |acc, &r| acc ^ gen_mask(r)));
                }
            }
            masks = next;
        }
        let name = match sub {
            None => base.to_string(),
            Some((from, extra)) => {
                format!("{base}[{0}->{0}{1}]", self.name(from), self.name(extra))
            }
        };
        let paulis: Vec<PauliString> =
            masks.iter().map(|&m| self.group.element(m).pauli.clone()).collect();
        Ok(MerminVariant { name, masks, classical_bound: lhv_bound(&paulis)? })
    }
}

/// All two-setting constructions available for `graph`: the four-vertex
/// star, the four-vertex path and the three-vertex star.
pub fn mermin_variants(graph: &Graph, group: &StabilizerGroup) -> Result<Vec<MerminVariant>> {
    let n = graph.vertex_count();
    let degrees: Vec<usize> = (0..n).map(|v| graph.neighbors(v).len()).collect();
    let edges = graph.edges().count();
    let labels = graph.labels();
    let none = "no two-setting construction for graph".to_string();

    if n == 4 && edges == 3 && degrees.contains(&3) {
        // roles 0..2 are the leaves, role 3 the centre
        let centre = degrees.iter().position(|&d| d == 3).unwrap_or(0);
        let mut roles: Vec<usize> = (0..4).filter(|&v| v != centre).collect();
        roles.push(centre);
        let b = Builder { group, roles, labels };
        let mut out = Vec::new();
        let base: [Factor; 2] = [&[&[3]], &[&[], &[1, 2], &[1, 0], &[2, 0]]];
        out.push(b.variant("MII", &base, None)?);
        for k in 0..3 {
            out.push(b.variant("MII", &base, Some((3, k)))?);
        }
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let name = format!("MII'({},{})", b.name(i), b.name(j));
            let f: [Factor; 3] = [&[&[3]], &[&[], &[i]], &[&[], &[j]]];
            out.push(b.variant(&name, &f, None)?);
            out.push(b.variant(&name, &f, Some((3, k)))?);
        }
        return Ok(out);
    }

    if n == 4 && edges == 3 && degrees.iter().filter(|&&d| d == 1).count() == 2 {
        let order = path_order(graph).ok_or(Error::UnknownVariant(none))?;
        // role r corresponds to generator r+1 of the line 3-1-2-4
        let roles = vec![order[1], order[2], order[0], order[3]];
        let b = Builder { group, roles, labels };
        let mut out = Vec::new();
        let first: [Factor; 3] = [&[&[0]], &[&[], &[1]], &[&[], &[2]]];
        out.push(b.variant("MII", &first, None)?);
        out.push(b.variant("MII", &first, Some((1, 3)))?);
        let second: [Factor; 3] = [&[&[0]], &[&[], &[2]], &[&[1], &[3]]];
        out.push(b.variant("MII'", &second, None)?);
        out.push(b.variant("MII'", &second, Some((1, 3)))?);
        for i in 0..4 {
            out.push(b.variant("MII'", &second, Some((i, (i + 1) % 4)))?);
        }
        return Ok(out);
    }

    if n == 3 && edges == 2 {
        let centre = degrees.iter().position(|&d| d == 2).unwrap_or(0);
        let mut roles: Vec<usize> = (0..3).filter(|&v| v != centre).collect();
        roles.push(centre);
        let b = Builder { group, roles, labels };
        let f: [Factor; 3] = [&[&[2]], &[&[], &[0]], &[&[], &[1]]];
        return Ok(vec![b.variant("MII", &f, None)?]);
    }

    Err(Error::UnknownVariant(none))
}

/// Vertices of a path graph in order, starting from the endpoint with the
/// smaller label.
fn path_order(graph: &Graph) -> Option<Vec<usize>> {
    let n = graph.vertex_count();
    let start = (0..n).find(|&v| graph.neighbors(v).len() == 1)?;
    let mut order = vec![start];
    while order.len() < n {
        let last = *order.last()?;
        let next = graph.neighbors(last).into_iter().find(|v| !order.contains(v))?;
        order.push(next);
    }
    Some(order)
}

/// Looks a variant up by name.
pub fn mermin_variant(graph: &Graph, group: &StabilizerGroup, name: &str) -> Result<MerminVariant> {
    mermin_variants(graph, group)?
        .into_iter()
        .find(|v| v.name == name)
        .ok_or_else(|| Error::UnknownVariant(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::generators_from_graph;

    fn ideal(group: &StabilizerGroup) -> Vec<Estimate> {
        vec![Estimate::exact(1.0); group.elements().len()]
    }

    #[test]
    fn star_variants_and_bounds() {
        let g = Graph::star4();
        let group = generators_from_graph(&g).unwrap();
        let vs = mermin_variants(&g, &group).unwrap();
        assert_eq!(vs.len(), 10);
        assert!(vs.iter().all(|v| v.is_valid() && v.masks.len() == 4));
        assert_eq!(vs[0].masks, vec![0b1000, 0b1110, 0b1011, 0b1101]);
        assert_eq!(vs[1].name, "MII[g4->g4g1]");
        let summary = mermin_two_setting_all(&g, &group, &ideal(&group)).unwrap();
        assert_eq!(summary.best().unwrap().value, 4.0);
    }

    #[test]
    fn line_variants_flag_invalid_substitutions() {
        let g = Graph::line4();
        let group = generators_from_graph(&g).unwrap();
        let vs = mermin_variants(&g, &group).unwrap();
        assert_eq!(vs.len(), 8);
        let invalid: Vec<&str> = vs.iter().filter(|v| !v.is_valid()).map(|v| v.name.as_str()).collect();
        assert_eq!(invalid, ["MII'[g3->g3g4]", "MII'[g4->g4g1]"]);
    }

    #[test]
    fn three_setting_bounds() {
        for (g, bound) in [(Graph::star4(), 12.0), (Graph::line4(), 12.0), (Graph::star(3, 3).unwrap(), 6.0)] {
            let group = generators_from_graph(&g).unwrap();
            let r = mermin_three_setting(&group, &ideal(&group)).unwrap();
            assert_eq!(r.classical_bound, bound);
            assert_eq!(r.value, group.elements().len() as f64);
        }
    }

    #[test]
    fn unknown_variant() {
        let g = Graph::star4();
        let group = generators_from_graph(&g).unwrap();
        assert!(matches!(mermin_variant(&g, &group, "nope"), Err(Error::UnknownVariant(_))));
        let pair = Graph::path(&[1, 4]).unwrap();
        let pg = generators_from_graph(&pair).unwrap();
        assert!(mermin_variants(&pair, &pg).is_err());
    }

    #[test]
    fn fidelity_of_perfect_data() {
        let f = fidelity(&[Estimate::exact(1.0); 16]);
        assert_eq!(f.value, 1.0);
        assert!(f.witness);
    }

    #[test]
    fn chsh_tsirelson() {
        let e = Estimate::exact(SQRT_2 / 2.0);
        let r = chsh(e, e, e, Estimate::exact(-SQRT_2 / 2.0));
        assert!((r.value - r.quantum_bound).abs() < 1e-12);
    }
}
