//! Finite-alphabet probability engine.
//!
//! Dense tables over named axes. Everything is immutable after construction
//! and all functionals are pure, so values can be shared freely across
//! threads. Entropies and mutual informations are in bits.

use crate::error::Error;
use crate::regions::AuxConfig;
use crate::{Result, MARKOV_TOL, PMF_TOL};

/// The eight named variables a joint table can carry, in canonical axis
/// order: source, observations, eavesdropper side information, coarse
/// quantization layers, refinement layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y1,
    Y2,
    E,
    V1,
    V2,
    U1,
    U2,
}

impl Var {
    pub const ALL: [Var; 8] = [
        Var::X,
        Var::Y1,
        Var::Y2,
        Var::E,
        Var::V1,
        Var::V2,
        Var::U1,
        Var::U2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "X",
            Var::Y1 => "Y1",
            Var::Y2 => "Y2",
            Var::E => "E",
            Var::V1 => "V1",
            Var::V2 => "V2",
            Var::U1 => "U1",
            Var::U2 => "U2",
        }
    }

    fn rank(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y1 => 1,
            Var::Y2 => 2,
            Var::E => 3,
            Var::V1 => 4,
            Var::V2 => 5,
            Var::U1 => 6,
            Var::U2 => 7,
        }
    }
}

fn fmt_vars(vars: &[Var]) -> String {
    vars.iter().map(|v| v.name()).collect::<Vec<_>>().join(",")
}

/// A probability mass function over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates non-negativity and normalization (within [`PMF_TOL`]).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf {
                name: "pmf".into(),
                reason: "empty alphabet".into(),
            });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPmf {
                    name: "pmf".into(),
                    reason: format!("entry {i} is {p}"),
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidPmf {
                name: "pmf".into(),
                reason: format!("sums to {sum}, off by {:.3e}", sum - 1.0),
            });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on letter `i`.
    pub fn delta(n: usize, i: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[i] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// A conditional pmf: row `i` is the distribution of the output given input
/// letter `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPmf {
    rows: Vec<Pmf>,
}

impl CondPmf {
    pub fn new(rows: Vec<Pmf>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidPmf {
                name: "conditional pmf".into(),
                reason: "no rows".into(),
            });
        }
        let ncols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    axis: "conditional pmf row",
                    expected: ncols,
                    got: rows[i].len(),
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| Pmf::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Identity channel on an alphabet of size `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| Pmf::delta(n, i)).collect(),
        }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Self {
        Self {
            rows: vec![
                Pmf {
                    probs: vec![1.0 - p, p],
                },
                Pmf {
                    probs: vec![p, 1.0 - p],
                },
            ],
        }
    }

    /// Channel collapsing every input to a single output letter.
    pub fn constant(n_in: usize) -> Self {
        Self {
            rows: vec![Pmf { probs: vec![1.0] }; n_in],
        }
    }

    pub fn n_in(&self) -> usize {
        self.rows.len()
    }

    pub fn n_out(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, i: usize) -> &Pmf {
        &self.rows[i]
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].probs[output]
    }
}

/// A discrete memoryless source: hidden law `p(x)`, the two observation
/// channels, the eavesdropper side-information channel, and the distortion
/// measure `d(x, x̂)`.
///
/// The reconstruction alphabet is the column count of `distortion`; it
/// defaults to the source alphabet but may differ.
#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub px: Pmf,
    pub py1_x: CondPmf,
    pub py2_x: CondPmf,
    pub pe_x: CondPmf,
    pub distortion: Vec<Vec<f64>>,
    pub d_max: f64,
}

impl SourceSpec {
    pub fn new(
        px: Pmf,
        py1_x: CondPmf,
        py2_x: CondPmf,
        pe_x: CondPmf,
        distortion: Vec<Vec<f64>>,
        d_max: f64,
    ) -> Result<Self> {
        let nx = px.len();
        for (axis, ch) in [("Y1", &py1_x), ("Y2", &py2_x), ("E", &pe_x)] {
            if ch.n_in() != nx {
                return Err(Error::DimensionMismatch {
                    axis: match axis {
                        "Y1" => "p(y1|x) rows",
                        "Y2" => "p(y2|x) rows",
                        _ => "p(e|x) rows",
                    },
                    expected: nx,
                    got: ch.n_in(),
                });
            }
        }
        if distortion.len() != nx {
            return Err(Error::DimensionMismatch {
                axis: "distortion rows",
                expected: nx,
                got: distortion.len(),
            });
        }
        let nxhat = distortion[0].len();
        if nxhat == 0 {
            return Err(Error::BadSourceFile("empty distortion row".into()));
        }
        for (i, row) in distortion.iter().enumerate() {
            if row.len() != nxhat {
                return Err(Error::DimensionMismatch {
                    axis: "distortion columns",
                    expected: nxhat,
                    got: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 || d > d_max {
                    return Err(Error::BadSourceFile(format!(
                        "distortion[{i}][{j}] = {d} outside [0, {d_max}]"
                    )));
                }
            }
        }
        Ok(Self {
            px,
            py1_x,
            py2_x,
            pe_x,
            distortion,
            d_max,
        })
    }

    /// Uniform binary source with symmetric observation channels: both
    /// agents see `X` through a BSC(`p_obs`), the eavesdropper through a
    /// BSC(`p_eve`), Hamming distortion.
    pub fn binary_symmetric(p_obs: f64, p_eve: f64) -> Self {
        Self {
            px: Pmf::uniform(2),
            py1_x: CondPmf::bsc(p_obs),
            py2_x: CondPmf::bsc(p_obs),
            pe_x: CondPmf::bsc(p_eve),
            distortion: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            d_max: 1.0,
        }
    }

    pub fn nx(&self) -> usize {
        self.px.len()
    }

    pub fn ny1(&self) -> usize {
        self.py1_x.n_out()
    }

    pub fn ny2(&self) -> usize {
        self.py2_x.n_out()
    }

    pub fn ne(&self) -> usize {
        self.pe_x.n_out()
    }

    /// Size of the reconstruction alphabet.
    pub fn nxhat(&self) -> usize {
        self.distortion[0].len()
    }
}

/// A dense joint distribution over a subset of the named axes, stored in
/// canonical axis order with the last axis fastest.
#[derive(Debug, Clone)]
pub struct JointDist {
    vars: Vec<Var>,
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointDist {
    /// Builds a joint from a flat table (canonical axis order, last axis
    /// fastest). Validates non-negativity and total mass.
    pub fn from_table(vars: Vec<Var>, dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if vars.len() != dims.len() {
            return Err(Error::BadVarSet(format!(
                "{} vars but {} dims",
                vars.len(),
                dims.len()
            )));
        }
        for w in vars.windows(2) {
            if w[0].rank() >= w[1].rank() {
                return Err(Error::BadVarSet(format!(
                    "axes must be distinct and in canonical order, got {}",
                    fmt_vars(&vars)
                )));
            }
        }
        let total: usize = dims.iter().product();
        if probs.len() != total {
            return Err(Error::DimensionMismatch {
                axis: "joint table",
                expected: total,
                got: probs.len(),
            });
        }
        let mut mass = 0.0;
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidPmf {
                    name: "joint table".into(),
                    reason: format!("entry {p}"),
                });
            }
            mass += p;
        }
        if (mass - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidPmf {
                name: "joint table".into(),
                reason: format!("total mass {mass}"),
            });
        }
        Ok(Self { vars, dims, probs })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Alphabet size of `v`, if the joint carries that axis.
    pub fn dim(&self, v: Var) -> Option<usize> {
        self.axis(v).map(|i| self.dims[i])
    }

    fn axis(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&w| w == v)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for i in (0..self.dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.dims[i + 1];
        }
        s
    }

    fn check_subset(&self, vars: &[Var]) -> Result<()> {
        for &v in vars {
            if self.axis(v).is_none() {
                return Err(Error::BadVarSet(format!(
                    "axis {} not present in joint over {}",
                    v.name(),
                    fmt_vars(&self.vars)
                )));
            }
        }
        for (i, &a) in vars.iter().enumerate() {
            if vars[i + 1..].contains(&a) {
                return Err(Error::BadVarSet(format!("axis {} listed twice", a.name())));
            }
        }
        Ok(())
    }

    /// Sums out every axis not in `keep`. Mass is preserved; marginalizing
    /// over the empty set yields the scalar table `[1.0]`.
    pub fn marginal(&self, keep: &[Var]) -> Result<JointDist> {
        self.check_subset(keep)?;
        // Kept axes stay in canonical order regardless of argument order.
        let kept: Vec<usize> = (0..self.vars.len())
            .filter(|&i| keep.contains(&self.vars[i]))
            .collect();
        let out_vars: Vec<Var> = kept.iter().map(|&i| self.vars[i]).collect();
        let out_dims: Vec<usize> = kept.iter().map(|&i| self.dims[i]).collect();
        let out_len: usize = out_dims.iter().product::<usize>().max(1);

        let strides = self.strides();
        let mut out_strides = vec![0usize; self.vars.len()];
        {
            let mut s = 1usize;
            for (slot, &i) in kept.iter().enumerate().rev() {
                let _ = slot;
                out_strides[i] = s;
                s *= self.dims[i];
            }
        }

        let mut out = vec![0.0f64; out_len];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut o = 0usize;
            for &i in &kept {
                o += (flat / strides[i]) % self.dims[i] * out_strides[i];
            }
            out[o] += p;
        }
        Ok(JointDist {
            vars: out_vars,
            dims: out_dims,
            probs: out,
        })
    }

    /// Shannon entropy of the whole table, in bits, with `0·log(1/0) = 0`.
    fn table_entropy(&self) -> f64 {
        self.probs
            .iter()
            .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
            .sum()
    }

    /// Conditional entropy `H(vars | given)` in bits.
    pub fn entropy(&self, vars: &[Var], given: &[Var]) -> Result<f64> {
        for &v in vars {
            if given.contains(&v) {
                return Err(Error::BadVarSet(format!(
                    "{} appears on both sides of the conditioning bar",
                    v.name()
                )));
            }
        }
        self.check_subset(vars)?;
        self.check_subset(given)?;
        let mut all = vars.to_vec();
        all.extend_from_slice(given);
        let h_all = self.marginal(&all)?.table_entropy();
        if given.is_empty() {
            return Ok(h_all);
        }
        let h_given = self.marginal(given)?.table_entropy();
        Ok(h_all - h_given)
    }

    /// Conditional mutual information `I(a; b | given)` in bits.
    pub fn mutual_info(&self, a: &[Var], b: &[Var], given: &[Var]) -> Result<f64> {
        for &v in a {
            if b.contains(&v) || given.contains(&v) {
                return Err(Error::BadVarSet(format!("{} overlaps", v.name())));
            }
        }
        for &v in b {
            if given.contains(&v) {
                return Err(Error::BadVarSet(format!("{} overlaps", v.name())));
            }
        }
        let mut b_given = b.to_vec();
        b_given.extend_from_slice(given);
        Ok(self.entropy(a, given)? - self.entropy(a, &b_given)?)
    }

    /// Tests whether the ordered groups form a Markov chain: for every
    /// interior group, the conditional mutual information between its past
    /// and its future given the group itself must stay below [`MARKOV_TOL`].
    ///
    /// Groups must be disjoint and carried by the joint; a chain of fewer
    /// than three groups holds vacuously.
    pub fn check_markov(&self, chain: &[&[Var]]) -> bool {
        let mut seen: Vec<Var> = Vec::new();
        for group in chain {
            for &v in *group {
                assert!(
                    self.axis(v).is_some() && !seen.contains(&v),
                    "check_markov groups must be disjoint subsets of the joint's axes"
                );
                seen.push(v);
            }
        }
        for i in 1..chain.len().saturating_sub(1) {
            let past: Vec<Var> = chain[..i].iter().flat_map(|g| g.iter().copied()).collect();
            let future: Vec<Var> = chain[i + 1..]
                .iter()
                .flat_map(|g| g.iter().copied())
                .collect();
            let leak = self
                .mutual_info(&past, &future, chain[i])
                .expect("validated above");
            if leak > MARKOV_TOL {
                return false;
            }
        }
        true
    }

    /// How much an interior group of `chain` leaks between past and future;
    /// the maximum conditional mutual information over interior nodes.
    pub fn markov_leak(&self, chain: &[&[Var]]) -> f64 {
        let mut worst = 0.0f64;
        for i in 1..chain.len().saturating_sub(1) {
            let past: Vec<Var> = chain[..i].iter().flat_map(|g| g.iter().copied()).collect();
            let future: Vec<Var> = chain[i + 1..]
                .iter()
                .flat_map(|g| g.iter().copied())
                .collect();
            if let Ok(leak) = self.mutual_info(&past, &future, chain[i]) {
                worst = worst.max(leak);
            }
        }
        worst
    }
}

/// Assembles the eight-variable joint
/// `p(x) p(y1|x) p(y2|x) p(e|x) p(u1|y1) p(u2|y2) p(v1|u1) p(v2|u2)`.
///
/// The marginal over `(X, Y1, Y2, E)` reproduces the source law exactly.
pub fn chain_join(source: &SourceSpec, aux: &AuxConfig) -> Result<JointDist> {
    if aux.pu1_y1.n_in() != source.ny1() {
        return Err(Error::DimensionMismatch {
            axis: "p(u1|y1) rows",
            expected: source.ny1(),
            got: aux.pu1_y1.n_in(),
        });
    }
    if aux.pu2_y2.n_in() != source.ny2() {
        return Err(Error::DimensionMismatch {
            axis: "p(u2|y2) rows",
            expected: source.ny2(),
            got: aux.pu2_y2.n_in(),
        });
    }
    if aux.pv1_u1.n_in() != aux.pu1_y1.n_out() {
        return Err(Error::DimensionMismatch {
            axis: "p(v1|u1) rows",
            expected: aux.pu1_y1.n_out(),
            got: aux.pv1_u1.n_in(),
        });
    }
    if aux.pv2_u2.n_in() != aux.pu2_y2.n_out() {
        return Err(Error::DimensionMismatch {
            axis: "p(v2|u2) rows",
            expected: aux.pu2_y2.n_out(),
            got: aux.pv2_u2.n_in(),
        });
    }

    let (nx, ny1, ny2, ne) = (source.nx(), source.ny1(), source.ny2(), source.ne());
    let (nv1, nv2) = (aux.pv1_u1.n_out(), aux.pv2_u2.n_out());
    let (nu1, nu2) = (aux.pu1_y1.n_out(), aux.pu2_y2.n_out());
    let dims = vec![nx, ny1, ny2, ne, nv1, nv2, nu1, nu2];
    let total: usize = dims.iter().product();
    let mut probs = vec![0.0f64; total];

    let mut idx = 0usize;
    for x in 0..nx {
        let px = source.px.probs()[x];
        for y1 in 0..ny1 {
            let p1 = px * source.py1_x.prob(x, y1);
            for y2 in 0..ny2 {
                let p2 = p1 * source.py2_x.prob(x, y2);
                for e in 0..ne {
                    let p3 = p2 * source.pe_x.prob(x, e);
                    for v1 in 0..nv1 {
                        for v2 in 0..nv2 {
                            for u1 in 0..nu1 {
                                let p4 = p3 * aux.pu1_y1.prob(y1, u1) * aux.pv1_u1.prob(u1, v1);
                                for u2 in 0..nu2 {
                                    probs[idx] =
                                        p4 * aux.pu2_y2.prob(y2, u2) * aux.pv2_u2.prob(u2, v2);
                                    idx += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    JointDist::from_table(Var::ALL.to_vec(), dims, probs)
}

/// Binary entropy function, in bits.
pub fn h2(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}
