use num_complex::Complex64;
use rand::{Rng, RngExt};

use super::fit::{fit_expansion_with, Basis, ResolventExpansion};
use crate::cz::{check_block, covering_grid, profile, CZBlock, CZKernelProfile};
use crate::error::Result;
use crate::kernel::{convolve, ComplexKernel, Kernel};
use crate::params::w;

/// One representation `lambda delta_0 + beta H + gamma H^2 + K` with the
/// CZ profile of `K`.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub lambda: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub k: ComplexKernel,
    pub profile: CZKernelProfile<Complex64>,
    pub a_norm: f64,
}

fn profile_norm(p: &CZKernelProfile<Complex64>) -> f64 {
    p.blocks
        .iter()
        .chain(p.tail.iter())
        .map(|b| check_block(&b.kernel, b.scale, b.omega, None).d_min)
        .fold(0.0, f64::max)
}

impl AlgebraElement {
    fn assemble(lambda: Complex64, beta: Complex64, gamma: Complex64, k: ComplexKernel, profile: CZKernelProfile<Complex64>) -> Self {
        let mut el = AlgebraElement {
            lambda,
            beta,
            gamma,
            k,
            profile,
            a_norm: 0.0,
        };
        el.a_norm = algebra_norm(&el);
        el
    }

    /// Profiles `k` on the basis grid.
    pub fn new(lambda: Complex64, beta: Complex64, gamma: Complex64, k: ComplexKernel, basis: &Basis) -> Result<Self> {
        let grid = covering_grid(basis.lowest, k.radius());
        let prof = profile(&k, &grid, basis.omega)?;
        Ok(Self::assemble(lambda, beta, gamma, k, prof))
    }

    /// Uses `blocks` as the representation of `K`.
    pub fn from_blocks(lambda: Complex64, beta: Complex64, gamma: Complex64, blocks: Vec<CZBlock<Complex64>>) -> Self {
        let mut k = Kernel::zero();
        for b in &blocks {
            k = k.add(&b.kernel);
        }
        let norm = blocks.iter().map(|b| b.d).fold(0.0, f64::max);
        let prof = CZKernelProfile {
            blocks,
            tail: None,
            cz_norm: norm,
        };
        Self::assemble(lambda, beta, gamma, k, prof)
    }

    pub fn from_expansion(e: ResolventExpansion) -> Self {
        Self::assemble(e.lambda_prime, e.beta, e.gamma, e.residual, e.residual_profile)
    }

    /// The fitted representation of a full kernel.
    pub fn canonical(full: &ComplexKernel, basis: &Basis) -> Result<Self> {
        Ok(Self::from_expansion(fit_expansion_with(full, basis)?))
    }

    pub fn identity() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self::from_blocks(Complex64::new(1.0, 0.0), zero, zero, Vec::new())
    }

    pub fn full_kernel(&self, basis: &Basis) -> ComplexKernel {
        basis.combine(self.lambda, self.beta, self.gamma).add(&self.k)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let map = |b: &CZBlock<Complex64>| CZBlock {
            kernel: b.kernel.scale(c),
            d: b.d * c.norm(),
            ..b.clone()
        };
        let prof = CZKernelProfile {
            blocks: self.profile.blocks.iter().map(map).collect(),
            tail: self.profile.tail.as_ref().map(map),
            cz_norm: self.profile.cz_norm * c.norm(),
        };
        Self::assemble(self.lambda * c, self.beta * c, self.gamma * c, self.k.scale(c), prof)
    }
}

/// `|lambda| + |beta| + |gamma| + max D` over the stored blocks, the tail
/// included.
pub fn algebra_norm(el: &AlgebraElement) -> f64 {
    el.lambda.norm() + el.beta.norm() + el.gamma.norm() + profile_norm(&el.profile)
}

#[derive(Debug, Clone)]
pub struct AlgebraProduct {
    pub element: AlgebraElement,
    /// `||a b|| / (||a|| ||b||)`.
    pub ratio: f64,
}

/// Convolves the full kernels and re-fits the product.
pub fn algebra_product(a: &AlgebraElement, b: &AlgebraElement, basis: &Basis) -> Result<AlgebraProduct> {
    let full = convolve(&a.full_kernel(basis), &b.full_kernel(basis))?;
    let element = AlgebraElement::canonical(&full, basis)?;
    let ratio = element.a_norm / (a.a_norm * b.a_norm);
    Ok(AlgebraProduct { element, ratio })
}

fn unit<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A mean-free block of scale `s` supported in `[-s/2, s/2]` with random
/// values, normalized to `D = d`.
pub fn random_block<R: Rng + ?Sized>(rng: &mut R, s: u64, d: f64, omega: f64) -> CZBlock<Complex64> {
    let r = (s / 2) as i64;
    let sf = s as f64;
    let bump = |x: i64| w(4.0 * x as f64 / sf);
    let raw = Kernel::from_fn(-r, r, |x| unit(rng) * bump(x));
    let weight: f64 = (-r..=r).map(bump).sum();
    let mean = raw.mass() / weight;
    let centered = raw.sub(&Kernel::<f64>::from_fn(-r, r, bump).to_complex().scale(mean));
    let d0 = check_block(&centered, s, omega, None).d_min;
    CZBlock::measure(centered.scale_f64(d / d0), s, omega)
}

/// Random coefficients in the unit square and one block per dyadic scale
/// from `basis.lowest` to `top`, each with `D` uniform in `[0.1, 1]`.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, basis: &Basis, top: u64) -> AlgebraElement {
    let mut blocks = Vec::new();
    let mut s = basis.lowest;
    while s <= top {
        let d = rng.random_range(0.1..1.0);
        blocks.push(random_block(rng, s, d, basis.omega));
        s *= 2;
    }
    AlgebraElement::from_blocks(unit(rng), unit(rng), unit(rng), blocks)
}
