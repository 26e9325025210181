use anyhow::{ensure, Context as _};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use heralink::analysis::{
    chsh_s, fidelity_phi_plus, mle_tomography, sample_counts, standard_tomography_settings, witness_expectation,
    ChshSettings, DensityMatrixJson, MleOptions,
};
use heralink::bsm::{heralded_swap, HeraldRule};
use heralink::config::run_link_monte_carlo;
use heralink::linksim::{
    budget_table, edr_analytic, edr_multiplexed, fidelity_vs_efficiency, heralding_margin, log_grid, BudgetLine,
    FidelityNoiseModel, LinkReport,
};
use heralink::memory::multimode_capacity;
use heralink::sources::{g2_cross_correlation, pair_prob_for_g2, postselected_source_rho};
use heralink::{Scenario, Source};

use crate::output::{Context, Table};
use crate::Format;

const TSIRELSON: f64 = 2.828_427_124_746_190_1;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    A,
    B,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Pump,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct SourceMode {
    /// Coincidence and g2 against pair probability.
    #[arg(long, value_enum)]
    sweep: Option<SweepKind>,
    /// Reconstruct the post-selected source state from simulated counts.
    #[arg(long)]
    tomography: bool,
}

#[derive(Args, Debug)]
pub struct SourceArgs {
    #[command(flatten)]
    mode: SourceMode,
    #[arg(long, value_enum, default_value_t = Node::A)]
    node: Node,
    /// Pair probabilities for the pump sweep; empty for a header-only table.
    #[arg(long, value_delimiter = ',', num_args = 0..,
          default_values_t = [0.001, 0.002, 0.004, 0.006, 0.008, 0.01, 0.012, 0.015, 0.02, 0.03])]
    pair_probs: Vec<f64>,
    /// Expected coincidences per tomography setting.
    #[arg(long, default_value_t = 1e5)]
    pairs_per_setting: f64,
}

#[derive(Args, Debug)]
pub struct SwapArgs {
    /// g2 targets; `inf` is the low-pair limit.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_values_t = [40.0, 50.0, 113.0])]
    g2_sweep: Vec<f64>,
    /// Detect the memory-side photons after storage instead of directly.
    #[arg(long)]
    stored: bool,
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Mode count for the multiplexed rate.
    #[arg(long, default_value_t = 56)]
    target_modes: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Efficiency,
    Modes,
    StorageTime,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    /// Number of grid points for the efficiency and storage-time axes.
    #[arg(long, default_value_t = 61)]
    points: usize,
}

fn node_source(sc: &Scenario, node: Node) -> anyhow::Result<Source> {
    let r = sc.resolve()?;
    Ok(match node {
        Node::A => r.source_a,
        Node::B => r.source_b,
    })
}

fn finite(what: &str, xs: &[f64]) -> anyhow::Result<()> {
    ensure!(xs.iter().all(|x| x.is_finite()), "non-finite value in {what}");
    Ok(())
}

pub fn source(sc: &Scenario, ctx: &Context, a: &SourceArgs) -> anyhow::Result<()> {
    let src = node_source(sc, a.node)?;
    if a.mode.tomography {
        return tomography(ctx, &src, a);
    }
    let dets = sc.arm_detectors(&src);
    let window = sc.calibration.map(|c| c.g2_window_ns).unwrap_or(2.0);
    let mut t = Table::new(&["pair_prob", "pump_mw", "singles_rate_1_hz", "singles_rate_2_hz", "coincidence_rate_hz", "g2"]);
    for &p in &a.pair_probs {
        let s = g2_cross_correlation(&src.with_pair_prob(p), dets, window).with_context(|| format!("pair probability {p}"))?;
        finite("source sweep", &[s.g2, s.coincidence_rate])?;
        t.push(vec![
            p.into(),
            src.pump.power_for(p).into(),
            s.singles_rate_1.into(),
            s.singles_rate_2.into(),
            s.coincidence_rate.into(),
            s.g2.into(),
        ]);
    }
    ctx.table("source-sweep", &t)
}

#[derive(Serialize)]
struct TomographyReport {
    node: &'static str,
    pair_prob: f64,
    intrinsic_visibility: f64,
    fidelity: f64,
    model_fidelity: f64,
    witness: f64,
    chsh: f64,
    purity: f64,
    iterations: usize,
    density_matrix: DensityMatrixJson,
}

fn tomography(ctx: &Context, src: &Source, a: &SourceArgs) -> anyhow::Result<()> {
    let truth = postselected_source_rho(src)?.rho;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let records = sample_counts(&truth, &standard_tomography_settings(), a.pairs_per_setting, 1.0, &mut rng);
    let mle = mle_tomography(&records, &MleOptions::default())?;
    mle.rho.validate(1e-10)?;
    let rho = &mle.rho;
    let r = TomographyReport {
        node: match a.node {
            Node::A => "a",
            Node::B => "b",
        },
        pair_prob: src.pair_prob,
        intrinsic_visibility: src.intrinsic_visibility,
        fidelity: fidelity_phi_plus(rho)?,
        model_fidelity: fidelity_phi_plus(&truth)?,
        witness: witness_expectation(rho),
        chsh: chsh_s(rho, &ChshSettings::experiment()),
        purity: rho.purity(),
        iterations: mle.iterations,
        density_matrix: rho.to_json(),
    };
    ensure!(r.chsh <= TSIRELSON + 1e-9, "CHSH value {} above the Tsirelson bound", r.chsh);
    match ctx.format {
        Format::Json => ctx.json("source-tomography", &r),
        Format::Csv => {
            let mut t = Table::new(&["node", "pair_prob", "intrinsic_visibility", "fidelity", "model_fidelity", "witness", "chsh", "purity"]);
            t.push(vec![
                r.node.into(),
                r.pair_prob.into(),
                r.intrinsic_visibility.into(),
                r.fidelity.into(),
                r.model_fidelity.into(),
                r.witness.into(),
                r.chsh.into(),
                r.purity.into(),
            ]);
            ctx.csv("source-tomography", &t)
        }
    }
}

pub fn swap(sc: &Scenario, ctx: &Context, a: &SwapArgs) -> anyhow::Result<()> {
    let resolved = sc.resolve()?;
    let window = sc.calibration.map(|c| c.g2_window_ns).unwrap_or(2.0);
    let mut t = Table::new(&[
        "g2_target",
        "pair_prob_a",
        "pair_prob_b",
        "fidelity",
        "witness",
        "chsh",
        "herald_probability",
        "fourfold_probability",
    ]);
    for &g2 in &a.g2_sweep {
        let solve = |s: &Source| -> anyhow::Result<f64> {
            if g2.is_infinite() {
                return Ok(1e-9);
            }
            pair_prob_for_g2(s, sc.arm_detectors(s), window, g2).with_context(|| format!("g2 target {g2}"))
        };
        let mut r = resolved;
        r.source_a = r.source_a.with_pair_prob(solve(&r.source_a)?);
        r.source_b = r.source_b.with_pair_prob(solve(&r.source_b)?);
        let s = heralded_swap(&sc.swap_setup(&r, a.stored)?, &HeraldRule::phi_plus())?;
        ensure!(s.chsh <= TSIRELSON + 1e-9, "CHSH value {} above the Tsirelson bound", s.chsh);
        finite("swap sweep", &[s.fidelity, s.witness, s.herald_probability])?;
        t.push(vec![
            g2.into(),
            r.source_a.pair_prob.into(),
            r.source_b.pair_prob.into(),
            s.fidelity.into(),
            s.witness.into(),
            s.chsh.into(),
            s.herald_probability.into(),
            s.fourfold_probability.into(),
        ]);
    }
    ctx.table("swap-g2", &t)
}

#[derive(Serialize)]
struct LinkSummary {
    heralding_margin_ns: f64,
    edr_analytic_per_h: f64,
    edr_model_per_h: f64,
    fourfold_before_storage_model_per_h: f64,
    budget: Vec<BudgetLine>,
    monte_carlo: LinkReport,
}

pub fn link(sc: &Scenario, ctx: &Context) -> anyhow::Result<()> {
    let report = run_link_monte_carlo(sc, sc.run.cycles, sc.run.seed, ctx.jobs)?;
    let model_budget = sc.model_budget()?;
    match ctx.format {
        Format::Json => {
            let s = LinkSummary {
                heralding_margin_ns: heralding_margin(&sc.timing),
                edr_analytic_per_h: edr_analytic(&sc.budget),
                edr_model_per_h: edr_analytic(&model_budget),
                fourfold_before_storage_model_per_h: model_budget.fourfold_before_storage_per_h,
                budget: budget_table(&sc.budget, &sc.timing, 56)?,
                monte_carlo: report,
            };
            ctx.json("link", &s)
        }
        Format::Csv => {
            let mut t = Table::new(&["time_ns", "kind", "cycle", "pulse", "slot", "detail"]);
            for e in &report.events {
                t.push(vec![
                    e.time_ns.into(),
                    e.kind.as_str().into(),
                    e.cycle.into(),
                    e.pulse.into(),
                    e.slot.into(),
                    e.detail.clone().into(),
                ]);
            }
            ctx.csv("link-events", &t)
        }
    }
}

pub fn budget(sc: &Scenario, ctx: &Context, a: &BudgetArgs) -> anyhow::Result<()> {
    let lines = budget_table(&sc.budget, &sc.timing, a.target_modes)?;
    let mut t = Table::new(&["quantity", "value", "unit", "reference"]);
    for l in &lines {
        t.push(vec![
            l.quantity.into(),
            l.value.into(),
            l.unit.into(),
            l.reference.map(|r| r.to_string()).unwrap_or_default().into(),
        ]);
    }
    match ctx.format {
        Format::Json => ctx.json("budget", &lines),
        Format::Csv => ctx.csv("budget", &t),
    }
}

pub fn sweep(sc: &Scenario, ctx: &Context, a: &SweepArgs) -> anyhow::Result<()> {
    match a.axis {
        Axis::Efficiency => {
            let m = FidelityNoiseModel::from_budget(&sc.budget)?;
            let mut t = Table::new(&["efficiency", "fidelity"]);
            for (eta, f) in fidelity_vs_efficiency(&m, &log_grid(1e-6, 1.0, a.points))? {
                t.push(vec![eta.into(), f.into()]);
            }
            ctx.table("sweep-efficiency", &t)
        }
        Axis::Modes => {
            let model = sc.link_model()?;
            let rep = sc.source_a.repetition_rate_hz;
            let cap = multimode_capacity(&sc.memory_a, rep).tbp_limited.max(multimode_capacity(&sc.memory_b, rep).tbp_limited);
            let b = &sc.budget;
            let mut t = Table::new(&["modes", "edr_scaled_measured_per_h", "edr_model_per_h"]);
            for m in 1..=cap.max(b.measured_modes) {
                t.push(vec![
                    m.into(),
                    edr_multiplexed(b.measured_edr_per_h, b.measured_modes, m)?.into(),
                    model.expected_fourfold_rate_per_h(m).into(),
                ]);
            }
            ctx.table("sweep-modes", &t)
        }
        Axis::StorageTime => {
            let mut t = Table::new(&["storage_time_ns", "efficiency_a", "efficiency_b", "decay_normalized", "heralding_margin_ns"]);
            let n = a.points.max(2);
            let tmax = 2000.0;
            for i in 0..n {
                let ts = tmax * i as f64 / (n - 1) as f64;
                let timing = heralink::Timing { storage_time_ns: ts, ..sc.timing };
                t.push(vec![
                    ts.into(),
                    sc.memory_a.efficiency_at(ts)?.into(),
                    sc.memory_b.efficiency_at(ts)?.into(),
                    (sc.memory_a.decay.eval(ts) / sc.memory_a.decay.eval(sc.memory_a.storage_time_ns)).into(),
                    heralding_margin(&timing).into(),
                ]);
            }
            ctx.table("sweep-storage-time", &t)
        }
    }
}
