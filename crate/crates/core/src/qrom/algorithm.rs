//! Scripted oracle algorithms and query-weight instrumentation.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rand::Rng;

use crate::statevec::{RegisterLayout, StateError};
use crate::{Matrix, State};

use super::{coherent_query, Oracle, OracleError};

/// Snapshots above this support size keep only per-input weights.
pub const MAX_SCHMIDT_SUPPORT: usize = 1 << 10;

/// The oracle a run is answered by.
#[derive(Clone, Copy)]
pub enum QueryOracle<'a> {
    /// XOR query `|x⟩|y⟩ ↦ |x⟩|y ⊕ O(x)⟩` on the query and answer registers.
    Classical(&'a dyn Oracle),
    /// An arbitrary unitary acting on the query register alone.
    Unitary(&'a Matrix),
}

/// An algorithm `U_T O U_{T−1} ⋯ O U_0 |ψ_0⟩` with dense step unitaries.
#[derive(Clone, Debug)]
pub struct OracleAlgorithm {
    initial: State,
    steps: Vec<Matrix>,
    query_reg: String,
    answer_reg: Option<String>,
}

/// Every pre-query state plus the final state.
#[derive(Clone, Debug)]
pub struct Run {
    /// `snapshots[t − 1]` is the state on submitting query `t`.
    pub snapshots: Vec<State>,
    pub final_state: State,
}

impl OracleAlgorithm {
    /// `steps` holds `T + 1` unitaries over the whole layout; `steps[t]` runs
    /// after query `t` (and `steps[0]` before the first).
    pub fn new(
        initial: State,
        steps: Vec<Matrix>,
        query_reg: &str,
        answer_reg: Option<&str>,
    ) -> Result<Self, OracleError> {
        let layout = initial.layout();
        layout.width(query_reg)?;
        if let Some(a) = answer_reg {
            layout.width(a)?;
        }
        let dim = 1usize << layout.total_width();
        if steps.is_empty() {
            return Err(StateError::ArityMismatch { expected: 1, got: 0 }.into());
        }
        for u in &steps {
            if u.dim() != dim {
                return Err(StateError::DimMismatch(u.dim(), dim).into());
            }
        }
        Ok(Self {
            initial,
            steps,
            query_reg: query_reg.to_string(),
            answer_reg: answer_reg.map(str::to_string),
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        self.initial.layout()
    }

    pub fn queries(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn query_reg(&self) -> &str {
        &self.query_reg
    }

    fn answer(&self, st: &State, oracle: QueryOracle<'_>) -> Result<State, OracleError> {
        match oracle {
            QueryOracle::Classical(o) => {
                let ans = self.answer_reg.as_deref().ok_or_else(|| StateError::UnknownRegister("answer".into()))?;
                coherent_query(st, &self.query_reg, ans, o)
            }
            QueryOracle::Unitary(u) => Ok(st.apply_unitary(&self.query_reg, u)?),
        }
    }

    /// Runs the algorithm, keeping the state on submission of every query.
    pub fn run(&self, oracle: QueryOracle<'_>) -> Result<Run, OracleError> {
        let mut st = self.initial.apply_unitary_all(&self.steps[0])?;
        let mut snapshots = Vec::with_capacity(self.queries());
        for u in &self.steps[1..] {
            snapshots.push(st.clone());
            st = self.answer(&st, oracle)?.apply_unitary_all(u)?;
        }
        Ok(Run { snapshots, final_state: st })
    }

    /// State on submitting query `t` (1-based).
    pub fn state_at_query(&self, oracle: QueryOracle<'_>, t: usize) -> Result<State, OracleError> {
        if t == 0 || t > self.queries() {
            return Err(OracleError::NoQueries);
        }
        let mut st = self.initial.apply_unitary_all(&self.steps[0])?;
        for u in &self.steps[1..t] {
            st = self.answer(&st, oracle)?.apply_unitary_all(u)?;
        }
        Ok(st)
    }

    pub fn trace(&self, oracle: QueryOracle<'_>) -> Result<QueryTrace, OracleError> {
        let run = self.run(oracle)?;
        QueryTrace::from_snapshots(&run.snapshots, &self.query_reg)
    }
}

/// Query-register description at one query.
#[derive(Clone, Debug)]
pub struct QueryRecord {
    /// 1-based query index.
    pub index: usize,
    /// Probability of each query-register value.
    pub weights: BTreeMap<u64, f64>,
    /// Schmidt coefficients `|α_i|²` with the query-register vectors `q_i`.
    pub schmidt: Option<Vec<(f64, Vec<Complex<f64>>)>>,
}

#[derive(Clone, Debug, Default)]
pub struct QueryTrace {
    pub records: Vec<QueryRecord>,
}

impl QueryTrace {
    pub fn from_snapshots(snapshots: &[State], query_reg: &str) -> Result<Self, OracleError> {
        let mut records = Vec::with_capacity(snapshots.len());
        for (i, st) in snapshots.iter().enumerate() {
            let weights = st
                .outcome_probabilities(query_reg)?
                .into_iter()
                .map(|(x, p)| (x as u64, p))
                .collect();
            let schmidt = if st.len() <= MAX_SCHMIDT_SUPPORT {
                let rho = st.density(&[query_reg])?;
                let (vals, vecs) = rho.matrix().eigh()?;
                let dim = vecs.dim();
                Some(
                    vals.into_iter()
                        .enumerate()
                        .filter(|(_, p)| *p > 1e-15)
                        .map(|(j, p)| (p, (0..dim).map(|r| vecs[(r, j)]).collect()))
                        .collect(),
                )
            } else {
                None
            };
            records.push(QueryRecord { index: i + 1, weights, schmidt });
        }
        Ok(Self { records })
    }

    pub fn queries(&self) -> usize {
        self.records.len()
    }

    /// Weight on `set` at each query.
    pub fn per_query_weight(&self, set: &BTreeSet<u64>) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.weights.iter().filter(|(x, _)| set.contains(x)).map(|(_, p)| p).sum())
            .collect()
    }
}

/// Total query weight `Σ_t Σ_{x∈S} |α_{x,t}|²`.
pub fn query_weight(trace: &QueryTrace, set: &BTreeSet<u64>) -> f64 {
    trace.per_query_weight(set).iter().sum()
}

/// Runs the algorithm up to a uniformly random query and measures the query
/// register, returning `(x, O(x))`; `None` when the algorithm makes no queries.
pub fn extract_by_random_query<R: Rng + ?Sized>(
    alg: &OracleAlgorithm,
    oracle: &dyn Oracle,
    rng: &mut R,
) -> Result<Option<(u64, u64)>, OracleError> {
    if alg.queries() == 0 {
        return Ok(None);
    }
    let t = rng.gen_range(1..=alg.queries());
    let st = alg.state_at_query(QueryOracle::Classical(oracle), t)?;
    let m = st.measure(alg.query_reg(), rng)?;
    let x = m.outcome.value() as u64;
    Ok(Some((x, oracle.eval(x))))
}
