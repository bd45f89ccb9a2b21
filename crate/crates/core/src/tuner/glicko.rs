use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Ratio between the public rating scale and the internal Glicko-2 scale.
const SCALE: f64 = 173.7178;
const BASE_RATING: f64 = 1500.0;

pub const INITIAL_RATING: f64 = 1500.0;
pub const INITIAL_DEVIATION: f64 = 350.0;
pub const INITIAL_VOLATILITY: f64 = 0.06;
/// Convergence tolerance of the volatility iteration.
pub const VOLATILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Glicko2State {
    pub rating: f64,
    pub deviation: f64,
    pub volatility: f64,
}

impl Default for Glicko2State {
    fn default() -> Self {
        Self {
            rating: INITIAL_RATING,
            deviation: INITIAL_DEVIATION,
            volatility: INITIAL_VOLATILITY,
        }
    }
}

/// One game of a rating period, seen from the rated player's side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResult {
    pub opponent_rating: f64,
    pub opponent_deviation: f64,
    /// 1 for a win, 0 for a loss, anything in between for partial credit.
    pub score: f64,
}

impl Glicko2State {
    pub fn new(rating: f64, deviation: f64, volatility: f64) -> Self {
        Self { rating, deviation, volatility }
    }

    /// `[rating - 2 deviation, rating + 2 deviation]`.
    pub fn interval(&self) -> (f64, f64) {
        (self.rating - 2.0 * self.deviation, self.rating + 2.0 * self.deviation)
    }

    /// State after one rating period with the given games.
    ///
    /// A period without games only widens the deviation.
    pub fn updated(&self, games: &[GameResult], tau: f64) -> Self {
        let mu = (self.rating - BASE_RATING) / SCALE;
        let phi = self.deviation / SCALE;
        let sigma = self.volatility;
        if games.is_empty() {
            let phi_star = (phi * phi + sigma * sigma).sqrt();
            return Self { deviation: phi_star * SCALE, ..*self };
        }

        let mut inv_v = 0.0;
        let mut sum = 0.0;
        for game in games {
            let mu_j = (game.opponent_rating - BASE_RATING) / SCALE;
            let g = g(game.opponent_deviation / SCALE);
            let e = 1.0 / (1.0 + (-g * (mu - mu_j)).exp());
            inv_v += g * g * e * (1.0 - e);
            sum += g * (game.score - e);
        }
        let v = 1.0 / inv_v;
        let delta = v * sum;

        let sigma_new = new_volatility(phi, sigma, v, delta, tau);
        let phi_star = (phi * phi + sigma_new * sigma_new).sqrt();
        let phi_new = 1.0 / (1.0 / (phi_star * phi_star) + 1.0 / v).sqrt();
        let mu_new = mu + phi_new * phi_new * sum;
        Self {
            rating: mu_new * SCALE + BASE_RATING,
            deviation: phi_new * SCALE,
            volatility: sigma_new,
        }
    }
}

fn g(phi: f64) -> f64 {
    1.0 / (1.0 + 3.0 * phi * phi / (PI * PI)).sqrt()
}

/// Illinois-method root of the volatility equation.
fn new_volatility(phi: f64, sigma: f64, v: f64, delta: f64, tau: f64) -> f64 {
    let a = (sigma * sigma).ln();
    let f = |x: f64| {
        let ex = x.exp();
        let denom = phi * phi + v + ex;
        ex * (delta * delta - phi * phi - v - ex) / (2.0 * denom * denom) - (x - a) / (tau * tau)
    };

    let mut lo = a;
    let mut hi = if delta * delta > phi * phi + v {
        (delta * delta - phi * phi - v).ln()
    } else {
        let mut k = 1.0;
        while f(a - k * tau) < 0.0 {
            k += 1.0;
        }
        a - k * tau
    };
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    while (hi - lo).abs() > VOLATILITY_TOLERANCE {
        let c = lo + (lo - hi) * f_lo / (f_hi - f_lo);
        let f_c = f(c);
        if f_c * f_hi <= 0.0 {
            lo = hi;
            f_lo = f_hi;
        } else {
            f_lo /= 2.0;
        }
        hi = c;
        f_hi = f_c;
    }
    (lo / 2.0).exp()
}
