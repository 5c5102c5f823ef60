use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Family, Model};
use crate::scalar::{format_rational, rational_to_f64, Rational};

/// Largest segment the dynamic programme accepts.
pub const MAX_DP_STEPS: usize = 10_000;
/// Largest segment for explicit sequence enumeration.
pub const MAX_BRUTE_FORCE_STEPS: usize = 12;

/// Initial ensemble of a segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// Invariant region measures: steady-state segments.
    #[default]
    Stationary,
    /// Lebesgue measure on the square.
    Uniform,
}

/// Exact law of `g` over segments of `n` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDistribution {
    family: Family,
    l: Rational,
    n: usize,
    start: Start,
    probs: BTreeMap<i64, Rational>,
}

impl SymbolDistribution {
    /// Drops zero entries; checks normalization and that the support is
    /// symmetric about zero.
    pub fn new(family: Family, l: Rational, n: usize, start: Start, probs: BTreeMap<i64, Rational>) -> Result<Self> {
        let probs: BTreeMap<i64, Rational> = probs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if probs.values().sum::<Rational>() != Rational::one() {
            return Err(Error::Inconsistent(format!(
                "distribution of g at n = {n} is not normalized"
            )));
        }
        if let Some(g) = probs.keys().find(|g| !probs.contains_key(&-**g)) {
            return Err(Error::Inconsistent(format!(
                "support of g at n = {n} has {g} but not {}",
                -g
            )));
        }
        Ok(Self {
            family,
            l,
            n,
            start,
            probs,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn l(&self) -> &Rational {
        &self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start(&self) -> Start {
        self.start
    }

    pub fn probabilities(&self) -> &BTreeMap<i64, Rational> {
        &self.probs
    }

    pub fn get(&self, g: i64) -> Rational {
        self.probs.get(&g).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = i64> + '_ {
        self.probs.keys().copied()
    }

    pub fn mean_g(&self) -> Rational {
        self.probs
            .iter()
            .map(|(g, p)| p * Rational::from_integer((*g).into()))
            .sum()
    }

    /// Rows `g, probability, probability_f64`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,probability,probability_f64\n");
        for (g, p) in &self.probs {
            let _ = writeln!(out, "{g},{},{:.17e}", format_rational(p), rational_to_f64(p));
        }
        out
    }
}

fn initial_weights(model: &Model, start: Start) -> &[Rational] {
    match start {
        Start::Stationary => &model.chain().mu,
        Start::Uniform => &model.chain().widths,
    }
}

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::InvalidParameter(format!("segment length {n} outside 1..={max}")));
    }
    Ok(())
}

/// Laws of `g` for every segment length `1..=n_max` from one forward pass of
/// the dynamic programme over `(region, g)`.
pub fn exact_distributions(model: &Model, n_max: usize, start: Start) -> Result<Vec<SymbolDistribution>> {
    check_n(n_max, MAX_DP_STEPS)?;
    let chain = model.chain();
    let k = chain.len();
    let offset = n_max as i64;
    let width = 2 * n_max + 1;
    let idx = |g: i64| (g + offset) as usize;

    let mut layer = vec![vec![Rational::zero(); width]; k];
    for (i, w0) in initial_weights(model, start).iter().enumerate() {
        layer[i][idx(chain.weights[i])] = w0.clone();
    }
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut probs = BTreeMap::new();
        for row in &layer {
            for (slot, p) in row.iter().enumerate() {
                if !p.is_zero() {
                    *probs.entry(slot as i64 - offset).or_insert_with(Rational::zero) += p;
                }
            }
        }
        out.push(SymbolDistribution::new(
            model.family(),
            model.l().clone(),
            n,
            start,
            probs,
        )?);
        if n == n_max {
            break;
        }
        let mut next = vec![vec![Rational::zero(); width]; k];
        for (i, row) in layer.iter().enumerate() {
            for (j, target) in next.iter_mut().enumerate() {
                let pij = &chain.p.entries()[i][j];
                if pij.is_zero() {
                    continue;
                }
                let shift = chain.weights[j];
                for (slot, p) in row.iter().enumerate() {
                    if !p.is_zero() {
                        target[(slot as i64 + shift) as usize] += p * pij;
                    }
                }
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Law of `g = Σ_{k<n} w(i_k)` over admissible region sequences
/// `i_0 … i_{n−1}` weighted by `start(i_0) · Π p_{i_k i_{k+1}}`.
pub fn exact_distribution(model: &Model, n: usize, start: Start) -> Result<SymbolDistribution> {
    Ok(exact_distributions(model, n, start)?.pop().expect("n ≥ 1"))
}

/// Same law by listing every one of the `kⁿ` symbol sequences.
///
/// Each sequence is reduced to its start state, `g` and how often each
/// distinct transition probability occurs; weights are formed exactly once
/// per reduced class at the end.
pub fn brute_force_distribution(model: &Model, n: usize, start: Start) -> Result<SymbolDistribution> {
    check_n(n, MAX_BRUTE_FORCE_STEPS)?;
    let chain = model.chain();
    let k = chain.len();
    let p = chain.p.entries();

    let mut values: Vec<Rational> = Vec::new();
    let mut code = vec![vec![None; k]; k];
    for i in 0..k {
        for j in 0..k {
            if !p[i][j].is_zero() {
                let pos = values.iter().position(|v| *v == p[i][j]).unwrap_or_else(|| {
                    values.push(p[i][j].clone());
                    values.len() - 1
                });
                code[i][j] = Some(pos);
            }
        }
    }
    // Counts fit in 4 bits (n ≤ 12 < 16) and there are at most k² values.
    assert!(values.len() <= 16);

    let mut classes: HashMap<(usize, i64, u64), u64> = HashMap::new();
    let total = (k as u64).pow(n as u32);
    let mut seq = vec![0usize; n];
    'outer: for index in 0..total {
        let mut rest = index;
        for s in seq.iter_mut() {
            *s = (rest % k as u64) as usize;
            rest /= k as u64;
        }
        let mut g = 0;
        let mut counts = 0u64;
        for t in 0..n {
            g += chain.weights[seq[t]];
            if t + 1 < n {
                match code[seq[t]][seq[t + 1]] {
                    Some(c) => counts += 1 << (4 * c),
                    None => continue 'outer,
                }
            }
        }
        *classes.entry((seq[0], g, counts)).or_insert(0) += 1;
    }

    let init = initial_weights(model, start);
    let mut probs: BTreeMap<i64, Rational> = BTreeMap::new();
    for ((first, g, counts), multiplicity) in classes {
        let mut w = init[first].clone() * Rational::from_integer(multiplicity.into());
        for (c, v) in values.iter().enumerate() {
            let e = ((counts >> (4 * c)) & 0xf) as usize;
            w *= num_traits::pow(v.clone(), e);
        }
        *probs.entry(g).or_insert_with(Rational::zero) += w;
    }
    SymbolDistribution::new(model.family(), model.l().clone(), n, start, probs)
}

impl Serialize for SymbolDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let probs: BTreeMap<String, String> = self
            .probs
            .iter()
            .map(|(g, p)| (g.to_string(), format_rational(p)))
            .collect();
        let mut st = s.serialize_struct("SymbolDistribution", 5)?;
        st.serialize_field("family", &self.family)?;
        st.serialize_field("l", &format_rational(&self.l))?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("start", &self.start)?;
        st.serialize_field("probabilities", &probs)?;
        st.end()
    }
}
