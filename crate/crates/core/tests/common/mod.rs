//! Naive reference computations and random instance generators shared by
//! the integration tests. The oracles are plain loops over the raw inputs and
//! never call into the crate's statistics code.

#![allow(dead_code)]

use market_moments::ledger::{Ledger, MatchPolicy, SaleDecomposition};
use market_moments::moments::{InvestorId, Side, TradeTick};
use market_moments::sim::SimRng;

/// Mean `Σnum / Σbase` and volatility `Σ(r − mean)² base² / Σ base²`.
pub fn ratio_oracle(ratios: &[f64], nums: &[f64], bases: &[f64]) -> (f64, f64) {
    let mut sn = 0.0;
    let mut sb = 0.0;
    for i in 0..bases.len() {
        sn += nums[i];
        sb += bases[i];
    }
    let mean = sn / sb;
    let mut top = 0.0;
    let mut bottom = 0.0;
    for i in 0..bases.len() {
        top += (ratios[i] - mean) * (ratios[i] - mean) * bases[i] * bases[i];
        bottom += bases[i] * bases[i];
    }
    (mean, top / bottom)
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative agreement, treating two values inside the zero clamp as equal.
pub fn agrees(a: f64, b: f64, tol: f64) -> bool {
    rel(a, b) <= tol || a.abs().max(b.abs()) <= 1e-12
}

/// Oracle for one sale straight from its legs: `(g, C(tᵢ;1), C_o(tᵢ;1), σ²)`.
pub fn sale_oracle(sale: &SaleDecomposition) -> (f64, f64, f64, f64) {
    let ratios: Vec<f64> = sale
        .legs
        .iter()
        .map(|l| sale.sale_price / l.lot_price)
        .collect();
    let nums: Vec<f64> = sale
        .legs
        .iter()
        .map(|l| sale.sale_price * l.matched_volume)
        .collect();
    let bases: Vec<f64> = sale
        .legs
        .iter()
        .map(|l| l.lot_price * l.matched_volume)
        .collect();
    let (g, vol) = ratio_oracle(&ratios, &nums, &bases);
    let m = sale.legs.len() as f64;
    let c_avg = nums.iter().sum::<f64>() / m;
    let co_avg = bases.iter().sum::<f64>() / m;
    (g, c_avg, co_avg, vol)
}

/// Oracle for one investor's sales: `(G, C(t;1|1), C_o(t;1|1), σ_G²)`.
pub fn investor_oracle(sales: &[SaleDecomposition]) -> (f64, f64, f64, f64) {
    let per: Vec<_> = sales.iter().map(sale_oracle).collect();
    let ratios: Vec<f64> = per.iter().map(|p| p.0).collect();
    let nums: Vec<f64> = per.iter().map(|p| p.1).collect();
    let bases: Vec<f64> = per.iter().map(|p| p.2).collect();
    let (g, vol) = ratio_oracle(&ratios, &nums, &bases);
    let n = per.len() as f64;
    (
        g,
        nums.iter().sum::<f64>() / n,
        bases.iter().sum::<f64>() / n,
        vol,
    )
}

/// Oracle across investors: `(R, σ_R²)`.
pub fn market_oracle(investors: &[Vec<SaleDecomposition>]) -> (f64, f64) {
    let per: Vec<_> = investors.iter().map(|s| investor_oracle(s)).collect();
    let ratios: Vec<f64> = per.iter().map(|p| p.0).collect();
    let nums: Vec<f64> = per.iter().map(|p| p.1).collect();
    let bases: Vec<f64> = per.iter().map(|p| p.2).collect();
    ratio_oracle(&ratios, &nums, &bases)
}

pub fn uniform_in(rng: &mut SimRng, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

/// Lognormal prices and Pareto volumes with strictly increasing times.
pub fn random_ticks(rng: &mut SimRng, n: usize) -> Vec<TradeTick> {
    let id = InvestorId::new("x");
    (0..n)
        .map(|i| {
            let p = rng.lognormal(100f64.ln(), 0.2);
            let v = rng.pareto(1.5, 1.0);
            TradeTick::new(i as i64, id.clone(), Side::Buy, p, v).unwrap()
        })
        .collect()
}

/// A sale matched against `1..=max_lots` random lots under a random policy.
pub fn random_sale(rng: &mut SimRng, max_lots: usize, time: i64) -> SaleDecomposition {
    let id = InvestorId::new("x");
    let mut ledger = Ledger::new();
    let lots = uniform_in(rng, 1, max_lots);
    let mut held = 0.0;
    for t in 0..lots {
        let v = (rng.pareto(1.5, 5.0)).floor();
        ledger
            .record_purchase(&id, t as i64, rng.lognormal(100f64.ln(), 0.2), v)
            .unwrap();
        held += v;
    }
    let policy =
        [MatchPolicy::Fifo, MatchPolicy::Lifo, MatchPolicy::ProRata][rng.below(3) as usize];
    let volume = (held * (0.05 + 0.95 * rng.uniform())).max(1.0);
    let mut sale = ledger
        .record_sale(
            &id,
            lots as i64,
            rng.lognormal(100f64.ln(), 0.2),
            volume,
            policy,
        )
        .unwrap();
    sale.sale_time = time;
    sale
}

pub fn random_investor_sales(rng: &mut SimRng, max_sales: usize) -> Vec<SaleDecomposition> {
    let n = uniform_in(rng, 1, max_sales);
    (0..n).map(|i| random_sale(rng, 12, i as i64)).collect()
}
