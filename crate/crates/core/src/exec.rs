//! Execution phase: evaluate a built network on an input bit array.
//!
//! Perceptrons output 1 exactly when `sum(weight * child) + bias > 0`.
//! Gates follow Boolean semantics, an `and`/`or` gate with no inputs reads as
//! false. Arithmetic is integer throughout.

use std::fmt;

use crate::error::{Error, Result};
use crate::machine::GateType;
use crate::network::{Network, NodeKind};

/// A multidimensional array of bits stored in row-major order.
///
/// Zero dimensions describe a single bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitArray {
    dims: Vec<usize>,
    bits: Vec<bool>,
}

impl BitArray {
    pub fn zeros(dims: &[usize]) -> BitArray {
        BitArray {
            dims: dims.to_vec(),
            bits: vec![false; dims.iter().product()],
        }
    }

    pub fn from_bits(dims: &[usize], bits: Vec<bool>) -> Result<BitArray> {
        let len: usize = dims.iter().product();
        if bits.len() != len {
            return Err(Error::Argument(format!(
                "{} bits do not fill dims {dims:?} ({len} bits)",
                bits.len()
            )));
        }
        Ok(BitArray {
            dims: dims.to_vec(),
            bits,
        })
    }

    /// Bits `0..n` of `value` become flat positions `n-1..0`, so that counting
    /// `value` upwards enumerates inputs in lexicographic row-major order.
    pub fn from_index(dims: &[usize], value: u64) -> BitArray {
        let n: usize = dims.iter().product();
        let bits = (0..n).map(|p| (value >> (n - 1 - p)) & 1 == 1).collect();
        BitArray {
            dims: dims.to_vec(),
            bits,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Row-major flat position of `coords`, or `None` when out of range.
    pub fn flat_index(&self, coords: &[u64]) -> Option<usize> {
        if coords.len() != self.dims.len() {
            return None;
        }
        let mut flat = 0usize;
        for (&c, &d) in coords.iter().zip(&self.dims) {
            if c >= d as u64 {
                return None;
            }
            flat = flat * d + c as usize;
        }
        Some(flat)
    }

    pub fn get(&self, coords: &[u64]) -> Option<bool> {
        self.flat_index(coords).map(|i| self.bits[i])
    }

    pub fn set(&mut self, coords: &[u64], value: bool) -> Result<()> {
        let i = self
            .flat_index(coords)
            .ok_or_else(|| Error::Argument(format!("coordinates {coords:?} out of range")))?;
        self.bits[i] = value;
        Ok(())
    }

    /// Parses a 0/1 string whose first character is flat position 0.
    pub fn from_row_major_str(dims: &[usize], s: &str) -> Result<BitArray> {
        let bits = parse_bits(s)?;
        BitArray::from_bits(dims, bits)
    }

    /// Parses a 0/1 string using the `std::bitset` text convention: the
    /// *last* character is flat position 0, the first is the highest position.
    pub fn from_bitset_str(dims: &[usize], s: &str) -> Result<BitArray> {
        let mut bits = parse_bits(s)?;
        bits.reverse();
        BitArray::from_bits(dims, bits)
    }

    pub fn to_row_major_string(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Inverse of [`BitArray::from_bitset_str`].
    pub fn to_bitset_string(&self) -> String {
        self.bits
            .iter()
            .rev()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for BitArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_row_major_string())
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Argument(format!("invalid bit character `{other}`"))),
        })
        .collect()
}

/// Reusable evaluation buffer for repeated runs over one network.
pub struct Evaluator<'n> {
    net: &'n Network,
    values: Vec<bool>,
}

impl<'n> Evaluator<'n> {
    pub fn new(net: &'n Network) -> Self {
        Evaluator {
            net,
            values: vec![false; net.nodes.len()],
        }
    }

    pub fn evaluate(&mut self, input: &BitArray) -> Result<BitArray> {
        let net = self.net;
        if input.dims() != net.input_dims.as_slice() {
            return Err(Error::Argument(format!(
                "input has dims {:?}, network expects {:?} ({} bits)",
                input.dims(),
                net.input_dims,
                net.input_dims.iter().product::<usize>()
            )));
        }
        for &id in net.evaluation_order() {
            let node = &net.nodes[id];
            let links = net.links_from(id);
            let v = match &node.kind {
                NodeKind::Input { coords } => input.get(coords).unwrap_or(false),
                NodeKind::Read { coords, inverted } => {
                    input.get(coords).is_some_and(|b| b != *inverted)
                }
                NodeKind::Constant { value } => *value,
                NodeKind::Output { .. } | NodeKind::Hidden => match node.gate {
                    None => {
                        let sum: i64 = links
                            .iter()
                            .filter(|l| self.values[l.to])
                            .map(|l| l.weight)
                            .sum();
                        sum + node.bias > 0
                    }
                    Some(GateType::And) => {
                        !links.is_empty() && links.iter().all(|l| self.values[l.to])
                    }
                    Some(GateType::Or) => links.iter().any(|l| self.values[l.to]),
                    Some(GateType::True) => true,
                    Some(GateType::False) => false,
                    Some(GateType::Read | GateType::ReadInverted) => false,
                },
            };
            self.values[id] = v;
        }
        let bits = net
            .outputs
            .iter()
            .map(|o| o.is_some_and(|id| self.values[id]))
            .collect();
        BitArray::from_bits(&net.output_dims, bits)
    }
}

/// Evaluates `net` on one input.
pub fn evaluate(net: &Network, input: &BitArray) -> Result<BitArray> {
    Evaluator::new(net).evaluate(input)
}

/// Default cap on input bits for exhaustive truth tables.
pub const TRUTH_TABLE_CAP: usize = 20;

/// All `2^n` input/output pairs in lexicographic order of the row-major input.
pub fn truth_table(net: &Network) -> Result<Vec<(BitArray, BitArray)>> {
    truth_table_capped(net, TRUTH_TABLE_CAP)
}

pub fn truth_table_capped(net: &Network, cap: usize) -> Result<Vec<(BitArray, BitArray)>> {
    let n: usize = net.input_dims.iter().product();
    if n > cap {
        return Err(Error::TooManyInputs { bits: n, cap });
    }
    let mut eval = Evaluator::new(net);
    (0..1u64 << n)
        .map(|v| {
            let input = BitArray::from_index(&net.input_dims, v);
            let output = eval.evaluate(&input)?;
            Ok((input, output))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::BuildReport;
    use crate::machine::Flavor;
    use crate::network::{Link, Node};

    fn node(id: usize, kind: NodeKind, bias: i64) -> Node {
        Node {
            id,
            kind,
            bias,
            gate: None,
        }
    }

    /// Output perceptron over two inputs with the given weights and bias.
    fn perceptron(weights: [i64; 2], bias: i64) -> Network {
        let nodes = vec![
            node(0, NodeKind::Output { coords: vec![] }, bias),
            node(1, NodeKind::Input { coords: vec![0] }, 0),
            node(2, NodeKind::Input { coords: vec![1] }, 0),
        ];
        let links = vec![
            Link {
                from: 0,
                to: 1,
                weight: weights[0],
            },
            Link {
                from: 0,
                to: 2,
                weight: weights[1],
            },
        ];
        Network::assemble(
            Flavor::Ptm,
            vec![2],
            vec![],
            BuildReport::default(),
            vec![Some(0)],
            nodes,
            links,
        )
    }

    fn run(net: &Network, bits: &str) -> bool {
        let input = BitArray::from_row_major_str(&net.input_dims, bits).unwrap();
        evaluate(net, &input).unwrap().bits()[0]
    }

    #[test]
    fn and_perceptron() {
        let net = perceptron([2, 2], -2);
        assert!(run(&net, "11"));
        assert!(!run(&net, "10"));
        assert!(!run(&net, "01"));
        assert!(!run(&net, "00"));
    }

    #[test]
    fn or_perceptron() {
        let net = perceptron([2, 2], 0);
        assert!(run(&net, "01"));
        assert!(!run(&net, "00"));
    }

    #[test]
    fn threshold_is_strict() {
        // sum 2 == -bias must give 0
        let net = perceptron([2, 2], -2);
        assert!(!run(&net, "10"));
        let net = perceptron([1, 1], -1);
        assert!(!run(&net, "01"));
    }

    #[test]
    fn truth_table_order_and_cap() {
        let net = perceptron([2, 2], -2);
        let rows: Vec<(String, String)> = truth_table(&net)
            .unwrap()
            .into_iter()
            .map(|(i, o)| (i.to_row_major_string(), o.to_row_major_string()))
            .collect();
        assert_eq!(
            rows,
            vec![
                ("00".into(), "0".into()),
                ("01".into(), "0".into()),
                ("10".into(), "0".into()),
                ("11".into(), "1".into())
            ]
        );
        assert!(matches!(
            truth_table_capped(&net, 1),
            Err(Error::TooManyInputs { bits: 2, cap: 1 })
        ));
    }

    #[test]
    fn dims_mismatch_names_expected_dims() {
        let net = perceptron([2, 2], 0);
        let err = evaluate(&net, &BitArray::zeros(&[3])).unwrap_err();
        assert!(err.to_string().contains("[2]"), "{err}");
    }

    #[test]
    fn bitset_string_convention() {
        let a = BitArray::from_bitset_str(&[6], "001101").unwrap();
        assert_eq!(a.bits(), &[true, false, true, true, false, false]);
        assert_eq!(a.to_bitset_string(), "001101");
        assert_eq!(a.to_row_major_string(), "101100");
    }
}
