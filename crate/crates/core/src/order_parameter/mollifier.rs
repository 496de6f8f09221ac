use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// One-sided bump `χ(s) ∝ exp(−1/(1 − (2s − 1)²))` on `(0, 1)`, scaled to
/// width `κ_m`. Only past states enter the convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierKernel {
    width: f64,
    dt: f64,
    weights: Vec<f64>,
}

fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let z = 2.0 * s - 1.0;
    (-1.0 / (1.0 - z * z)).exp()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

impl MollifierKernel {
    /// Weight `j` is the kernel mass over the lag cell
    /// `[(j − ½)dt, (j + ½)dt] ∩ [0, κ_m]`, normalized to unit sum.
    pub fn new(width: f64, dt: f64) -> Self {
        assert!(
            width >= 0.0 && dt > 0.0,
            "mollifier needs width >= 0 and dt > 0"
        );
        if width <= 0.5 * dt {
            return Self {
                width,
                dt,
                weights: vec![1.0],
            };
        }
        let cells = (width / dt - 0.5).ceil() as usize + 1;
        let mut weights: Vec<f64> = (0..cells)
            .map(|j| {
                let lo = ((j as f64 - 0.5) * dt).max(0.0) / width;
                let hi = ((j as f64 + 0.5) * dt).min(width) / width;
                if hi > lo {
                    simpson(bump, lo, hi, 32)
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        while weights.len() > 1 && *weights.last().unwrap() == 0.0 {
            weights.pop();
        }
        Self { width, dt, weights }
    }

    /// `weights()[j]` multiplies the frame `j` steps in the past.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of frames the window spans, including the current one.
    pub fn span(&self) -> usize {
        self.weights.len()
    }

    /// Mean lag `Σⱼ wⱼ·j·dt`.
    pub fn mean_lag(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * j as f64 * self.dt)
            .sum()
    }
}

/// Ring buffer of the most recent frames together with the kernel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierState {
    kernel: MollifierKernel,
    /// Front is the most recent frame.
    frames: VecDeque<ScalarField>,
}

impl MollifierState {
    pub fn new(width: f64, dt: f64) -> Self {
        let kernel = MollifierKernel::new(width, dt);
        Self {
            frames: VecDeque::with_capacity(kernel.span()),
            kernel,
        }
    }

    /// Buffer filled with copies of the initial state, standing in for the
    /// history before `t = 0`.
    pub fn with_initial(initial: &ScalarField, width: f64, dt: f64) -> Self {
        let mut state = Self::new(width, dt);
        state.pad_with(initial);
        state
    }

    /// Restores a buffer from frames ordered most recent first.
    pub fn from_frames(width: f64, dt: f64, frames: Vec<ScalarField>) -> Self {
        let mut state = Self::new(width, dt);
        state.frames = frames.into_iter().take(state.kernel.span()).collect();
        state
    }

    pub fn kernel(&self) -> &MollifierKernel {
        &self.kernel
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &ScalarField> {
        self.frames.iter()
    }

    /// Appends copies of the oldest available frame (or `frame` when the
    /// buffer is empty) until the window is covered.
    pub fn pad_with(&mut self, frame: &ScalarField) {
        let filler = self.frames.back().cloned().unwrap_or_else(|| frame.clone());
        while self.frames.len() < self.kernel.span() {
            self.frames.push_back(filler.clone());
        }
    }

    pub fn push(&mut self, frame: ScalarField) {
        self.frames.push_front(frame);
        self.frames.truncate(self.kernel.span());
    }

    /// `(χ_κ * S)` at the time of the most recent frame.
    ///
    /// Evaluated as `F₀ + Σ_{j≥1} wⱼ(Fⱼ − F₀)`, so a buffer of identical
    /// frames reproduces the frame bit for bit.
    pub fn mollify(&self) -> Result<ScalarField> {
        let span = self.kernel.span();
        if self.frames.len() < span {
            return Err(Error::InsufficientHistory {
                needed: span,
                available: self.frames.len(),
            });
        }
        let current = &self.frames[0];
        let mut out = current.values().to_vec();
        for (w, frame) in self.kernel.weights().iter().zip(&self.frames).skip(1) {
            if *w == 0.0 {
                continue;
            }
            for ((o, &v), &c) in out.iter_mut().zip(frame.values()).zip(current.values()) {
                *o += w * (v - c);
            }
        }
        Ok(ScalarField::from_raw(*current.grid(), out))
    }
}
