//! Syndrome encoding over an effective matrix and sum-product decoding of
//! Bob's noisy block against Alice's syndrome.

use crate::bits::{KeyBlock, Syndrome};
use crate::error::{Error, Result};
use crate::tanner::MatrixPrefix;

/// Parity of the key bits touching each check of the prefix.
pub fn encode_syndrome(prefix: &MatrixPrefix<'_>, key: &KeyBlock) -> Result<Syndrome> {
    if key.len() != prefix.width() {
        return Err(Error::LengthMismatch {
            expected: prefix.width(),
            actual: key.len(),
        });
    }
    let mut syn = vec![0u8; prefix.num_checks()];
    for (col, &bit) in prefix.columns().iter().zip(key.bits()) {
        if bit == 1 {
            for &c in col {
                syn[c] ^= 1;
            }
        }
    }
    Ok(Syndrome::from_bits(syn).expect("parities are 0/1"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Magnitude bound applied to every log-likelihood message.
    pub llr_clamp: f64,
    /// Crossover probability of the binary symmetric channel, used as prior.
    pub crossover_prior: f64,
}

impl DecoderConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 60;
    pub const DEFAULT_LLR_CLAMP: f64 = 25.0;

    pub fn new(crossover_prior: f64) -> Result<Self> {
        DecoderConfig {
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            llr_clamp: Self::DEFAULT_LLR_CLAMP,
            crossover_prior,
        }
        .validated()
    }

    pub fn with_prior(self, crossover_prior: f64) -> Result<Self> {
        DecoderConfig {
            crossover_prior,
            ..self
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.llr_clamp > 0.0 && self.llr_clamp.is_finite()) {
            return Err(Error::invalid("llr_clamp must be a positive finite number"));
        }
        if !(self.crossover_prior > 0.0 && self.crossover_prior < 0.5) {
            return Err(Error::invalid(format!(
                "crossover prior {} outside (0, 0.5)",
                self.crossover_prior
            )));
        }
        Ok(self)
    }

    /// Prior log-likelihood ratio `log((1-p)/p)` of a received 0.
    fn prior_llr(&self) -> f64 {
        let p = self.crossover_prior;
        ((1.0 - p) / p).ln().min(self.llr_clamp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub corrected_key: KeyBlock,
    pub success: bool,
    pub iterations_used: usize,
    pub unsatisfied_checks: usize,
}

/// Decodes a single block. Builds the message-passing structure on every
/// call; use [`BpDecoder`] to decode many blocks against one prefix.
pub fn decode(
    prefix: &MatrixPrefix<'_>,
    noisy_key: &KeyBlock,
    target: &Syndrome,
    config: &DecoderConfig,
) -> Result<DecodeResult> {
    BpDecoder::new(prefix).decode(noisy_key, target, config)
}

/// Flooding-schedule sum-product decoder bound to one effective matrix.
///
/// Edges are stored grouped by check node; `var_edges` maps each variable to
/// its edge slots. Variable-to-check messages are kept as `tanh(q/2)`.
/// Scratch buffers are reused across calls.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    width: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
    prior: Vec<f64>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    hard: Vec<u8>,
}

impl BpDecoder {
    pub fn new(prefix: &MatrixPrefix<'_>) -> Self {
        let rows = prefix.rows();
        let width = prefix.width();
        let mut check_ptr = Vec::with_capacity(rows.len() + 1);
        let mut edge_var = Vec::with_capacity(prefix.num_edges());
        check_ptr.push(0);
        for row in &rows {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let num_edges = edge_var.len();

        let mut var_ptr = vec![0usize; width + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for j in 0..width {
            var_ptr[j + 1] += var_ptr[j];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0usize; num_edges];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }

        BpDecoder {
            width,
            check_ptr,
            edge_var,
            var_ptr,
            var_edges,
            prior: vec![0.0; width],
            v2c: vec![0.0; num_edges],
            c2v: vec![0.0; num_edges],
            hard: vec![0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_checks(&self) -> usize {
        self.check_ptr.len() - 1
    }

    pub fn decode(
        &mut self,
        noisy_key: &KeyBlock,
        target: &Syndrome,
        config: &DecoderConfig,
    ) -> Result<DecodeResult> {
        if noisy_key.len() != self.width {
            return Err(Error::LengthMismatch {
                expected: self.width,
                actual: noisy_key.len(),
            });
        }
        if target.len() != self.num_checks() {
            return Err(Error::LengthMismatch {
                expected: self.num_checks(),
                actual: target.len(),
            });
        }
        let config = config.validated()?;
        let clamp = config.llr_clamp;
        let target = target.bits();

        let llr0 = config.prior_llr();
        for (p, &bit) in self.prior.iter_mut().zip(noisy_key.bits()) {
            *p = if bit == 0 { llr0 } else { -llr0 };
        }
        self.hard.copy_from_slice(noisy_key.bits());
        let mut unsatisfied = self.unsatisfied(target);
        if unsatisfied == 0 {
            return Ok(self.result(true, 0, 0));
        }
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e] = (0.5 * self.prior[v]).tanh();
        }

        for iter in 1..=config.max_iterations {
            self.check_update(target, clamp);
            self.variable_update(clamp);
            unsatisfied = self.unsatisfied(target);
            if unsatisfied == 0 {
                return Ok(self.result(true, iter, 0));
            }
        }
        Ok(self.result(false, config.max_iterations, unsatisfied))
    }

    fn result(&self, success: bool, iterations_used: usize, unsatisfied_checks: usize) -> DecodeResult {
        DecodeResult {
            corrected_key: KeyBlock::from_bits(self.hard.clone()).expect("hard decisions are 0/1"),
            success,
            iterations_used,
            unsatisfied_checks,
        }
    }

    /// Check-to-variable messages `2 atanh(prod tanh(q/2))` over the other
    /// edges of each check, sign-flipped where the syndrome bit is 1. The
    /// leave-one-out product uses prefix and suffix products, so no division.
    fn check_update(&mut self, target: &[u8], clamp: f64) {
        for (c, &s) in target.iter().enumerate() {
            let (lo, hi) = (self.check_ptr[c], self.check_ptr[c + 1]);
            let t = &self.v2c[lo..hi];
            let r = &mut self.c2v[lo..hi];
            let mut fwd = 1.0;
            for (rk, &tk) in r.iter_mut().zip(t) {
                *rk = fwd;
                fwd *= tk;
            }
            let sign = if s == 1 { -2.0 } else { 2.0 };
            let mut bwd = 1.0;
            for (rk, &tk) in r.iter_mut().zip(t).rev() {
                let ext = *rk * bwd;
                bwd *= tk;
                *rk = (sign * ext.atanh()).clamp(-clamp, clamp);
            }
        }
    }

    fn variable_update(&mut self, clamp: f64) {
        for v in 0..self.width {
            let slots = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
            let total = self.prior[v] + slots.iter().map(|&e| self.c2v[e]).sum::<f64>();
            for &e in slots {
                self.v2c[e] = (0.5 * (total - self.c2v[e]).clamp(-clamp, clamp)).tanh();
            }
            self.hard[v] = u8::from(total < 0.0);
        }
    }

    fn unsatisfied(&self, target: &[u8]) -> usize {
        target
            .iter()
            .enumerate()
            .filter(|&(c, &s)| {
                let parity = self.edge_var[self.check_ptr[c]..self.check_ptr[c + 1]]
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ self.hard[v]);
                parity != s
            })
            .count()
    }
}
