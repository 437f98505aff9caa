//! Signatures from the coset-state Fiat–Shamir NIZK: a signature on `m` is
//! a proof for `vk` under the oracle `H(m‖·)`.

use rand::Rng;
use serde::Serialize;

use crate::f2lin::F2Vec;
use crate::fs_cden::{
    CertState, DelVerOutcome, ExperimentRecord, FsCden, FsDeletionKey, NizkAdversary, ProofState,
    NIZK_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS,
};
use crate::qrom::{OracleTable, OracleView};
use crate::rng::stream;
use crate::sigma::keygen;

use super::{check_message, SigError};

pub const SIG_MSG_BITS: usize = 8;
pub const SIG_ORACLE_IN_BITS: usize = SIG_MSG_BITS + NIZK_ORACLE_IN_BITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SigKeys {
    pub vk: u64,
    pub sk: u64,
}

/// A signing oracle that records every message it is asked to sign.
#[derive(Debug)]
pub struct SigningOracle<'a> {
    scheme: &'a FsSig,
    oracle: &'a OracleView,
    keys: SigKeys,
    pub queries: Vec<u64>,
}

impl<'a> SigningOracle<'a> {
    pub fn new(scheme: &'a FsSig, oracle: &'a OracleView, keys: SigKeys) -> Self {
        Self { scheme, oracle, keys, queries: Vec::new() }
    }

    pub fn sign<R: Rng + ?Sized>(&mut self, m: u64, rng: &mut R) -> Result<(ProofState, FsDeletionKey), SigError> {
        self.queries.push(m);
        self.scheme.sign(self.oracle, &self.keys, m, rng)
    }
}

/// One run of the signature deniability experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigExperimentRecord {
    pub m_star: u64,
    /// Messages signed for the adversary through ordinary queries (`M`).
    pub signed: Vec<u64>,
    /// Messages the simulator asked its signing oracle for (`M_S`); absent in the real run.
    pub simulator_queries: Option<Vec<u64>>,
    pub record: ExperimentRecord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FsSig {
    pub nizk: FsCden,
    pub msg_bits: usize,
}

impl FsSig {
    pub fn new(lambda: usize) -> Result<Self, SigError> {
        Ok(Self { nizk: FsCden::new(lambda)?, msg_bits: SIG_MSG_BITS })
    }

    pub fn oracle(seed: u64) -> OracleView {
        OracleTable::new(seed, SIG_ORACLE_IN_BITS, NIZK_ORACLE_OUT_BITS).expect("fixed widths are valid").view()
    }

    pub fn gen<R: Rng + ?Sized>(&self, rng: &mut R) -> SigKeys {
        let (vk, sk) = keygen(&self.nizk.group, rng);
        SigKeys { vk, sk }
    }

    /// `H(m‖·)`.
    pub fn message_oracle(&self, oracle: &OracleView, m: u64) -> Result<OracleView, SigError> {
        check_message(m, self.msg_bits)?;
        Ok(oracle.prefix(F2Vec::from_value(self.msg_bits, m as u128)?)?)
    }

    pub fn sign<R: Rng + ?Sized>(
        &self,
        oracle: &OracleView,
        keys: &SigKeys,
        m: u64,
        rng: &mut R,
    ) -> Result<(ProofState, FsDeletionKey), SigError> {
        let hm = self.message_oracle(oracle, m)?;
        Ok(self.nizk.prove(&hm, keys.vk, keys.sk, rng)?)
    }

    pub fn verify(
        &self,
        oracle: &OracleView,
        vk: u64,
        m: u64,
        sig: &ProofState,
    ) -> Result<(f64, Option<ProofState>), SigError> {
        if sig.x != vk {
            return Ok((0.0, None));
        }
        let hm = self.message_oracle(oracle, m)?;
        Ok(self.nizk.verify(sig, &hm)?)
    }

    pub fn del(sig: ProofState) -> CertState {
        FsCden::del(sig)
    }

    pub fn delver<R: Rng + ?Sized>(
        &self,
        oracle: &OracleView,
        dk: &FsDeletionKey,
        m: u64,
        cert: &CertState,
        rng: &mut R,
    ) -> Result<DelVerOutcome, SigError> {
        let hm = self.message_oracle(oracle, m)?;
        Ok(self.nizk.delver(&hm, dk, cert, rng)?)
    }

    /// The adversary asks for its special signature on `m_star` and must delete it.
    pub fn real_experiment(
        &self,
        oracle: &OracleView,
        keys: &SigKeys,
        m_star: u64,
        adversary: &dyn NizkAdversary,
        seed: u64,
    ) -> Result<SigExperimentRecord, SigError> {
        let mut rng = stream(seed);
        let (sig, dk) = self.sign(oracle, keys, m_star, &mut rng)?;
        let hm = self.message_oracle(oracle, m_star)?;
        let out = adversary.run(&self.nizk, sig, &hm, &mut rng)?;
        let cert = ProofState { state: out.cert, x: keys.vk };
        let p = self.nizk.delver_probability(&hm, &dk, &cert)?;
        let record = self.nizk.record(p, &out.memo, seed, oracle.spec(), &mut rng);
        Ok(SigExperimentRecord { m_star, signed: Vec::new(), simulator_queries: None, record })
    }

    /// The simulator answers the special query without the signing key: it
    /// reprograms `H(m*‖·)` at the simulated challenge points. Its signing
    /// oracle is available but never used.
    pub fn simulate_experiment(
        &self,
        oracle: &OracleView,
        signer: &mut SigningOracle<'_>,
        vk: u64,
        m_star: u64,
        adversary: &dyn NizkAdversary,
        seed: u64,
    ) -> Result<SigExperimentRecord, SigError> {
        let mut rng = stream(seed);
        let hm = self.message_oracle(oracle, m_star)?;
        let keys = self.nizk.sim_keys(&mut rng)?;
        let pf = self.nizk.sim_proof(&hm, vk, &keys)?;
        let lift = m_star << NIZK_ORACLE_IN_BITS;
        let entries = self.nizk.sim_oracle_entries(&hm, &keys, vk)?.into_iter().map(|(x, y)| (lift | x, y));
        let h_prime = oracle.point_map(entries)?;
        let adv_oracle = self.message_oracle(&h_prime, m_star)?;
        let out = adversary.run(&self.nizk, pf, &adv_oracle, &mut rng)?;
        let cert = ProofState { state: out.cert, x: vk };
        let p = self.nizk.sim_delver_probability(&hm, &keys, &cert)?;
        let record = self.nizk.record(p, &out.memo, seed, h_prime.spec(), &mut rng);
        Ok(SigExperimentRecord { m_star, signed: Vec::new(), simulator_queries: Some(signer.queries.clone()), record })
    }
}
