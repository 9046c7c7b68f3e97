//! Toy problem for central-difference checks of every training gradient:
//! 4 items, T = 3, hidden widths ≤ 8, 64-bit arithmetic.

use fairdiff::data::PopBin;
use fairdiff::diffusion::{base_loss_fixed, build_schedule, draw_batch, Denoiser, DiffusionDraw, DiffusionSchedule};
use fairdiff::fairness::TargetDistribution;
use fairdiff::guidance::{GuidanceHyper, GuidanceNet, TailScaling};
use fairdiff::numerics::{finite_diff_check, NetGrads, SeededRng};
use fairdiff::trainer::{joint_objective, Frozen, JointBatch, JointEval, JointSettings, WeightSource};

const TOL: f64 = 1e-4;
const H: f64 = 1e-6;

struct Toy {
    main: Denoiser<f64>,
    weak: Denoiser<f64>,
    aan: GuidanceNet<f64>,
    x0: Vec<Vec<f64>>,
    draws: Vec<DiffusionDraw<f64>>,
    schedule: DiffusionSchedule<f64>,
    tail: Vec<bool>,
    bins: Vec<PopBin>,
    target: TargetDistribution,
}

fn toy(seed: u64) -> Toy {
    let mut rng = SeededRng::new(seed);
    let schedule = build_schedule::<f64>(3, 1, 0.05, 0.3).unwrap();
    let main = Denoiser::new(4, &[8], 4, &mut rng).unwrap();
    let weak = Denoiser::new(4, &[8], 4, &mut rng).unwrap();
    let aan = GuidanceNet::new(4, &[6], &GuidanceHyper::default(), &mut rng).unwrap();
    let x0 = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0, 0.0]];
    let draws = draw_batch(&mut rng, x0.len(), 4, &schedule);
    Toy {
        main,
        weak,
        aan,
        x0,
        draws,
        schedule,
        tail: vec![false, false, true, true],
        bins: vec![PopBin::High, PopBin::Mid, PopBin::Low, PopBin::Low],
        target: TargetDistribution::from_mean_history([0.3, 0.4, 0.3], [0.2, 0.3, 0.5]).unwrap(),
    }
}

fn settings(lambda_ag: f64, lambda_pop: f64) -> JointSettings<f64> {
    JointSettings { lambda_ag, lambda_pop, pop_k: 2, tau_pop: 0.1 }
}

impl Toy {
    fn eval(&self, main: &Denoiser<f64>, aan: &GuidanceNet<f64>, s: &JointSettings<f64>, frozen: &Frozen<f64>) -> JointEval<f64> {
        let batch = JointBatch { x0: &self.x0, draws: &self.draws, tail: &self.tail, bins: &self.bins, target: &self.target };
        joint_objective(main, &self.weak, WeightSource::Learned(aan), &batch, &self.schedule, s, frozen).unwrap()
    }

    fn frozen(&self) -> Frozen<f64> {
        let e = self.eval(&self.main, &self.aan, &settings(1.0, 1.0), &Frozen::default());
        Frozen { thresholds: Some(e.thresholds), scaling: Some(e.scaling) }
    }

    fn params(&self) -> (Vec<Vec<f64>>, Vec<String>) {
        let mut p = self.main.net.param_blocks();
        p.extend(self.aan.net.param_blocks());
        let mut names = self.main.net.block_names("main");
        names.extend(self.aan.net.block_names("aan"));
        (p, names)
    }

    fn with_params(&self, blocks: &[Vec<f64>]) -> (Denoiser<f64>, GuidanceNet<f64>) {
        let n = self.main.net.param_blocks().len();
        let mut main = self.main.clone();
        let mut aan = self.aan.clone();
        main.net.set_param_blocks(&blocks[..n]).unwrap();
        aan.net.set_param_blocks(&blocks[n..]).unwrap();
        (main, aan)
    }
}

fn grads_of(e: &JointEval<f64>) -> Vec<Vec<f64>> {
    let mut g = e.main_grads.blocks();
    g.extend(e.aan_grads.as_ref().unwrap().blocks());
    g
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

/// Checks the gradient of `term(eval(λ_AG, λ_pop)) ` where the analytic side
/// is `grads(λ) − grads(base-only)` when `isolate` is set.
fn check_term(seed: u64, lambda_ag: f64, lambda_pop: f64, isolate: bool, term: fn(&JointEval<f64>) -> f64) {
    let t = toy(seed);
    let frozen = t.frozen();
    let (params, names) = t.params();
    let s = settings(lambda_ag, lambda_pop);
    let full = t.eval(&t.main, &t.aan, &s, &frozen);
    let mut analytic = grads_of(&full);
    if isolate {
        let base = t.eval(&t.main, &t.aan, &settings(0.0, 0.0), &frozen);
        analytic = sub(&analytic, &grads_of(&base));
    }
    let report = finite_diff_check(
        |blocks| {
            let (m, a) = t.with_params(blocks);
            term(&t.eval(&m, &a, &s, &frozen))
        },
        &params,
        &analytic,
        &names,
        H,
        TOL,
    );
    assert!(report.passed(), "{:?}", report.worst_block());
}

pub fn base_loss_gradient() {
    let t = toy(11);
    let (loss, grads) = base_loss_fixed(&t.main, &t.x0, &t.draws, &t.schedule).unwrap();
    assert!(loss > 0.0);
    let report = finite_diff_check(
        |blocks| {
            let mut m = t.main.clone();
            m.net.set_param_blocks(blocks).unwrap();
            base_loss_fixed(&m, &t.x0, &t.draws, &t.schedule).unwrap().0
        },
        &t.main.net.param_blocks(),
        &grads.blocks(),
        &t.main.net.block_names("main"),
        H,
        TOL,
    );
    assert!(report.passed(), "{:?}", report.worst_block());
}

pub fn ag_term_gradient() {
    check_term(12, 1.0, 0.0, true, |e| e.ag);
}

pub fn pop_term_gradient() {
    check_term(13, 0.0, 1.0, true, |e| {
        assert!(e.pop > 0.0, "popularity term inactive on the toy batch");
        e.pop
    });
}

pub fn composed_objective_gradient() {
    for seed in [14, 15, 16] {
        check_term(seed, 0.7, 0.9, false, |e| e.total);
    }
}

pub fn adaptive_weight_gradient() {
    let t = toy(17);
    let mut rng = SeededRng::new(99);
    let z1: Vec<f64> = rng.normal_vec(4);
    let z0: Vec<f64> = rng.normal_vec(4);
    for scaling in [TailScaling::Raw, TailScaling::Standardized { mean: 0.3, std: 0.8 }] {
        let pass = t.aan.forward(&z1, &z0, &t.tail, &scaling).unwrap();
        let mut grads = NetGrads::zeros_like(&t.aan.net);
        let gz1 = t.aan.backward(&pass, 1.0, &t.tail, &mut grads).unwrap();
        let mut params = t.aan.net.param_blocks();
        params.push(z1.clone());
        let mut analytic = grads.blocks();
        analytic.push(gz1);
        let mut names = t.aan.net.block_names("aan");
        names.push("z1".into());
        let n = params.len() - 1;
        let report = finite_diff_check(
            |blocks| {
                let mut a = t.aan.clone();
                a.net.set_param_blocks(&blocks[..n]).unwrap();
                a.forward(&blocks[n], &z0, &t.tail, &scaling).unwrap().w
            },
            &params,
            &analytic,
            &names,
            H,
            TOL,
        );
        assert!(report.passed(), "{scaling:?}: {:?}", report.worst_block());
    }
}

pub fn zero_lambdas_reduce_to_base_loss() {
    let t = toy(18);
    let e = t.eval(&t.main, &t.aan, &settings(0.0, 0.0), &Frozen::default());
    let (loss, grads) = base_loss_fixed(&t.main, &t.x0, &t.draws, &t.schedule).unwrap();
    assert_eq!(e.base.to_bits(), loss.to_bits());
    assert_eq!(e.main_grads.blocks(), grads.blocks());
    assert!(e.aan_grads.unwrap().is_zero());
}

pub fn total_is_sum_of_terms() {
    let t = toy(19);
    let s = settings(0.6, 0.4);
    let e = t.eval(&t.main, &t.aan, &s, &Frozen::default());
    assert!((e.total - (e.base + 0.6 * e.ag + 0.4 * e.pop)).abs() <= 1e-9);
}
