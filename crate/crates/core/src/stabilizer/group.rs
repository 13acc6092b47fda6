use super::graph::Graph;
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};

/// Largest register for which the full `2^n` group is expanded.
pub const MAX_QUBITS: usize = 16;

/// One element of a stabilizer group together with the set of generators
/// whose product (in increasing generator order) produces it.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerElement {
    pub mask: u32,
    pub pauli: PauliString,
}

impl StabilizerElement {
    /// Label such as `g12` for `g1 g2`, `I` for the identity.
    pub fn label(&self) -> String {
        if self.mask == 0 {
            return "I".into();
        }
        let digits: Vec<String> = (0..32)
            .filter(|i| self.mask >> i & 1 == 1)
            .map(|i| (i + 1).to_string())
            .collect();
        let sep = if digits.iter().any(|d| d.len() > 1) { "," } else { "" };
        format!("g{}", digits.join(sep))
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    generators: Vec<PauliString>,
    elements: Vec<StabilizerElement>,
}

impl StabilizerGroup {
    /// Expands the group generated by `generators`, which must be Hermitian,
    /// pairwise commuting, and of equal length.
    pub fn from_generators(generators: Vec<PauliString>) -> Result<Self> {
        let k = generators.len();
        if k == 0 {
            return Err(Error::InvalidArgument("no generators".into()));
        }
        if k > MAX_QUBITS {
            return Err(Error::GraphTooLarge(k));
        }
        let n = generators[0].len();
        for (i, g) in generators.iter().enumerate() {
            if g.len() != n || !g.is_hermitian() {
                return Err(Error::InvalidArgument(format!("bad generator {g}")));
            }
            for h in &generators[..i] {
                if !g.commutes_with(h) {
                    return Err(Error::InvalidArgument(format!("{g} and {h} anticommute")));
                }
            }
        }
        let mut elements: Vec<StabilizerElement> = Vec::with_capacity(1 << k);
        elements.push(StabilizerElement { mask: 0, pauli: PauliString::identity(n) });
        for mask in 1u32..(1u32 << k) {
            // strip the highest set generator and reuse the smaller product
            let top = 31 - mask.leading_zeros();
            let rest = mask & !(1 << top);
            let pauli = elements[rest as usize].pauli.mul(&generators[top as usize]);
            elements.push(StabilizerElement { mask, pauli });
        }
        Ok(Self { generators, elements })
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// All `2^k` elements, indexed by generator mask.
    pub fn elements(&self) -> &[StabilizerElement] {
        &self.elements
    }

    pub fn element(&self, mask: u32) -> &StabilizerElement {
        &self.elements[mask as usize]
    }

    pub fn qubits(&self) -> usize {
        self.generators[0].len()
    }

    pub fn find(&self, pauli: &PauliString) -> Option<&StabilizerElement> {
        self.elements.iter().find(|e| &e.pauli == pauli)
    }
}

/// Canonical generators `g_i = X_i Π_{j ∈ N(i)} Z_j` of a graph state and the
/// full group they generate.
pub fn generators_from_graph(graph: &Graph) -> Result<StabilizerGroup> {
    let n = graph.vertex_count();
    if n > MAX_QUBITS {
        return Err(Error::GraphTooLarge(n));
    }
    let generators = (0..n)
        .map(|v| {
            let mut letters = vec![Pauli::I; n];
            letters[v] = Pauli::X;
            for u in graph.neighbors(v) {
                letters[u] = Pauli::Z;
            }
            PauliString::new(letters, false)
        })
        .collect();
    StabilizerGroup::from_generators(generators)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(group: &StabilizerGroup) -> Vec<String> {
        group.generators().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn star_generators() {
        let g = generators_from_graph(&Graph::star4()).unwrap();
        assert_eq!(settings(&g), ["+XIIZ", "+IXIZ", "+IIXZ", "+ZZZX"]);
    }

    #[test]
    fn line_generators() {
        let g = generators_from_graph(&Graph::line4()).unwrap();
        assert_eq!(settings(&g), ["+XZZI", "+ZXIZ", "+ZIXI", "+IZIX"]);
    }

    #[test]
    fn single_vertex() {
        let g = generators_from_graph(&Graph::new(&[1], &[]).unwrap()).unwrap();
        assert_eq!(settings(&g), ["+X"]);
        let els: Vec<String> = g.elements().iter().map(|e| e.pauli.to_string()).collect();
        assert_eq!(els, ["+I", "+X"]);
    }

    #[test]
    fn labels() {
        let g = generators_from_graph(&Graph::star4()).unwrap();
        assert_eq!(g.element(0b0011).label(), "g12");
        assert_eq!(g.element(0).label(), "I");
        assert_eq!(g.element(0b1110).pauli.to_string(), "-ZYYX");
    }

    #[test]
    fn rejects_anticommuting() {
        let gens = vec!["XI".parse().unwrap(), "ZI".parse().unwrap()];
        assert!(StabilizerGroup::from_generators(gens).is_err());
    }

    #[test]
    fn oversized_graph() {
        let labels: Vec<usize> = (1..=17).collect();
        let g = Graph::new(&labels, &[]).unwrap();
        assert!(matches!(generators_from_graph(&g), Err(Error::GraphTooLarge(17))));
    }
}
