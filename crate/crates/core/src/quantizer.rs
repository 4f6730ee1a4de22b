//! Lattice quantization with side-information decoding.
//!
//! The encoder rounds `x` to the cubic lattice `sℤ^dim` with cell size
//! `s = 2w/√dim` and transmits each lattice coordinate modulo a power of two
//! `L`. A decoder holding any reference within distance `y` of `x` recovers the
//! lattice point exactly, because the period `L·s` exceeds `2(y + w)`. The
//! reconstruction error is at most half the cell diagonal, `w`.
//!
//! Wire format: `dim` residues of `log₂L` bits each, packed big-endian and
//! most significant bit first, zero-padded to a whole byte. No header is sent;
//! both sides derive the configuration from shared state.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{project_to_tangent, TangentVector};
use crate::linalg::{check_finite, check_len};
use crate::{Error, Result};

const MAX_BITS: u32 = 62;
/// Largest `|x/s|` accepted by the encoder; keeps lattice indices exact in f64.
const MAX_INDEX: f64 = 4_503_599_627_370_496.0; // 2^52

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerConfig {
    input_radius: f64,
    output_radius: f64,
    dim: usize,
    bits_per_coord: u32,
}

impl QuantizerConfig {
    /// `y` is the promised bound on `‖x − reference‖`; `w` the guaranteed
    /// bound on the reconstruction error. Requires `y / w > 1`.
    pub fn new(input_radius: f64, output_radius: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if !(input_radius.is_finite() && input_radius > 0.0) {
            return Err(Error::invalid("input_radius", "must be positive and finite"));
        }
        if !(output_radius.is_finite() && output_radius > 0.0) {
            return Err(Error::invalid("output_radius", "must be positive and finite"));
        }
        if input_radius / output_radius <= 1.0 {
            return Err(Error::invalid(
                "input_radius",
                alloc::format!(
                    "ratio y/w = {} must exceed 1",
                    input_radius / output_radius
                ),
            ));
        }
        let cell = 2.0 * output_radius / libm::sqrt(dim as f64);
        let span = 2.0 * (input_radius + output_radius);
        let mut bits = 0;
        while libm::ldexp(cell, bits as i32) <= span {
            bits += 1;
            if bits > MAX_BITS {
                return Err(Error::invalid(
                    "input_radius",
                    "ratio y/w needs more than 62 bits per coordinate",
                ));
            }
        }
        Ok(QuantizerConfig {
            input_radius,
            output_radius,
            dim,
            bits_per_coord: bits,
        })
    }

    /// The configuration with input radius `y` whose modulus is exactly
    /// `2^bits`, i.e. the smallest output radius affordable at that budget.
    ///
    /// Needs `2^bits > 2√dim` so that `y/w > 1`.
    pub fn with_bits(input_radius: f64, bits: u32, dim: usize) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::invalid("bits", "must lie in 1..=62"));
        }
        let root = libm::sqrt(dim as f64);
        let modulus = libm::ldexp(1.0, bits as i32);
        if modulus <= 2.0 * root {
            return Err(Error::invalid(
                "bits",
                alloc::format!("2^{bits} must exceed 2·√dim = {}", 2.0 * root),
            ));
        }
        let ratio = Self::ratio_for_bits(bits, dim);
        let cfg = Self::new(input_radius, ratio * input_radius, dim)?;
        debug_assert_eq!(cfg.bits_per_coord, bits);
        Ok(cfg)
    }

    /// `w / y` used by [`QuantizerConfig::with_bits`]: `√dim / (2^bits − √dim)`,
    /// nudged up so the modulus inequality is strict.
    pub fn ratio_for_bits(bits: u32, dim: usize) -> f64 {
        let root = libm::sqrt(dim as f64);
        root / (libm::ldexp(1.0, bits as i32) - root) * (1.0 + 1e-9)
    }

    #[inline]
    pub fn input_radius(&self) -> f64 {
        self.input_radius
    }

    #[inline]
    pub fn output_radius(&self) -> f64 {
        self.output_radius
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `s = 2w/√dim`.
    #[inline]
    pub fn cell(&self) -> f64 {
        2.0 * self.output_radius / libm::sqrt(self.dim as f64)
    }

    /// `log₂ L`.
    #[inline]
    pub fn bits_per_coord(&self) -> u32 {
        self.bits_per_coord
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        1u64 << self.bits_per_coord
    }
}

/// `dim · log₂ L`.
pub fn bit_cost(cfg: &QuantizerConfig) -> u64 {
    cfg.dim as u64 * u64::from(cfg.bits_per_coord)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedMessage {
    payload: Vec<u8>,
    bit_count: u64,
    config: QuantizerConfig,
}

impl EncodedMessage {
    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn bit_count(&self) -> u64 {
        self.bit_count
    }

    pub fn config(&self) -> &QuantizerConfig {
        &self.config
    }

    /// Unpacks the transmitted residues.
    pub fn residues(&self) -> Vec<u64> {
        let width = self.config.bits_per_coord as usize;
        (0..self.config.dim)
            .map(|i| {
                let mut r = 0u64;
                for b in i * width..(i + 1) * width {
                    let bit = (self.payload[b / 8] >> (7 - b % 8)) & 1;
                    r = (r << 1) | u64::from(bit);
                }
                r
            })
            .collect()
    }
}

fn pack(residues: &[u64], width: usize) -> Vec<u8> {
    let total = residues.len() * width;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0;
    for &r in residues {
        for shift in (0..width).rev() {
            if (r >> shift) & 1 == 1 {
                out[pos / 8] |= 1 << (7 - pos % 8);
            }
            pos += 1;
        }
    }
    out
}

pub fn encode(cfg: &QuantizerConfig, x: &[f64]) -> Result<EncodedMessage> {
    check_len(cfg.dim, x.len())?;
    check_finite(x)?;
    let cell = cfg.cell();
    let mask = cfg.modulus() - 1;
    let residues = x
        .iter()
        .map(|&xi| {
            let scaled = xi / cell;
            if !(scaled.abs() < MAX_INDEX) {
                return Err(Error::LatticeOverflow(scaled.abs()));
            }
            // libm::round rounds half away from zero.
            let k = libm::round(scaled) as i64;
            Ok((k as u64) & mask)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedMessage {
        payload: pack(&residues, cfg.bits_per_coord as usize),
        bit_count: bit_cost(cfg),
        config: *cfg,
    })
}

/// Reconstructs the lattice point congruent to the message that lies in the
/// half-open window of width `L·s` centred on `reference`.
///
/// Correct whenever `‖x − reference‖ ≤ y`; otherwise the output is silently
/// wrong, so callers must enforce the radius themselves.
pub fn decode(msg: &EncodedMessage, reference: &[f64]) -> Result<Vec<f64>> {
    let cfg = &msg.config;
    check_len(cfg.dim, reference.len())?;
    check_finite(reference)?;
    let cell = cfg.cell();
    let period = cfg.modulus() as f64;
    Ok(msg
        .residues()
        .into_iter()
        .zip(reference)
        .map(|(r, &ref_i)| {
            let r = r as f64;
            let u = ref_i / cell;
            let k = r + period * libm::ceil((u - period / 2.0 - r) / period);
            k * cell
        })
        .collect())
}

/// Quantizes a tangent vector against a reference at the same base point.
///
/// Returns the wire message and the receiver's reconstruction, projected back
/// onto the tangent space. Projection is non-expansive, so the error bound `w`
/// survives it.
pub fn quantize_tangent(
    cfg: &QuantizerConfig,
    v: &TangentVector,
    reference: &TangentVector,
) -> Result<(EncodedMessage, TangentVector)> {
    if !v.base().same_point(reference.base()) {
        return Err(Error::BaseMismatch);
    }
    let msg = encode(cfg, v.coords())?;
    let decoded = decode(&msg, reference.coords())?;
    let out = project_to_tangent(reference.base(), &decoded)?;
    Ok((msg, out))
}

/// Width of the radius header carried by a measured-radius message.
pub const RADIUS_HEADER_BITS: u64 = 32;

/// The smallest `f32` not below `y`, widened back to `f64`: the input radius
/// a sender announces when it measured `‖x − reference‖ = y` itself.
pub fn header_radius(y: f64) -> Result<f64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(Error::invalid("input_radius", "must be positive and finite"));
    }
    let r = y as f32;
    let r = if (r as f64) < y { r.next_up() } else { r };
    if !r.is_finite() || r == 0.0 {
        return Err(Error::invalid("input_radius", "does not fit a 32-bit header"));
    }
    Ok(r as f64)
}

/// A message that may be empty: when the input radius is zero the receiver
/// already holds the exact value, so nothing is sent.
#[derive(Clone, Debug, PartialEq)]
pub enum Transmission {
    Empty,
    Lattice(EncodedMessage),
}

impl Transmission {
    /// Encodes `x` with radii `(y, w)`, or sends nothing when `y == 0`.
    pub fn new(input_radius: f64, output_radius: f64, x: &[f64]) -> Result<Self> {
        if input_radius == 0.0 {
            return Ok(Transmission::Empty);
        }
        let cfg = QuantizerConfig::new(input_radius, output_radius, x.len())?;
        Ok(Transmission::Lattice(encode(&cfg, x)?))
    }

    pub fn bit_count(&self) -> u64 {
        match self {
            Transmission::Empty => 0,
            Transmission::Lattice(m) => m.bit_count(),
        }
    }

    pub fn decode(&self, reference: &[f64]) -> Result<Vec<f64>> {
        match self {
            Transmission::Empty => Ok(reference.to_vec()),
            Transmission::Lattice(m) => decode(m, reference),
        }
    }
}
