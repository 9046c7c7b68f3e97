use crate::data::PopBin;
use crate::diffusion::{q_sample, reconstruction_error, Denoiser, DiffusionDraw, DiffusionSchedule, BLOWUP_LIMIT};
use crate::error::{Error, Result};
use crate::fairness::{pop_loss, rec_distribution_soft, TargetDistribution};
use crate::guidance::{fuse, tail_score, GuidanceNet, TailScaling};
use crate::numerics::{NetGrads, Scalar};

/// Where the fusion weight comes from during joint training.
#[derive(Debug, Clone, Copy)]
pub enum WeightSource<'a, F> {
    Learned(&'a GuidanceNet<F>),
    Constant(F),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSettings<F> {
    pub lambda_ag: F,
    pub lambda_pop: F,
    pub pop_k: usize,
    pub tau_pop: F,
}

/// Quantities that are treated as constants by the gradient. Left `None`
/// they are computed from the batch; fixing them makes the objective a
/// smooth function of the parameters for finite-difference checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Frozen<F> {
    pub thresholds: Option<Vec<F>>,
    pub scaling: Option<TailScaling<F>>,
}

#[derive(Debug, Clone, Copy)]
pub struct JointBatch<'a, F> {
    pub x0: &'a [Vec<F>],
    pub draws: &'a [DiffusionDraw<F>],
    pub tail: &'a [bool],
    pub bins: &'a [PopBin],
    pub target: &'a TargetDistribution,
}

/// Loss terms and parameter gradients of one joint step.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEval<F> {
    pub total: F,
    pub base: F,
    pub ag: F,
    pub pop: F,
    /// `[over_high, under_low, balance]` parts of `pop`.
    pub pop_terms: [F; 3],
    pub weights: Vec<F>,
    /// AAN signal inputs after feature masking, one row per example.
    pub fed: Vec<[F; 3]>,
    pub thresholds: Vec<F>,
    pub scaling: TailScaling<F>,
    pub main_grads: NetGrads<F>,
    pub aan_grads: Option<NetGrads<F>>,
}

/// `L = L_base(z₁) + λ_AG·mean‖z_AG − x₀‖² + λ_pop·L_pop(soft top-K of z_AG)`.
/// The weak model only runs forward; no gradient reaches it.
pub fn joint_objective<F: Scalar>(
    main: &Denoiser<F>,
    weak: &Denoiser<F>,
    source: WeightSource<'_, F>,
    batch: &JointBatch<'_, F>,
    schedule: &DiffusionSchedule<F>,
    settings: &JointSettings<F>,
    frozen: &Frozen<F>,
) -> Result<JointEval<F>> {
    let b = batch.x0.len();
    if b == 0 || batch.draws.len() != b {
        return Err(Error::InvalidInput("joint step needs one draw per nonempty batch row".into()));
    }
    let scale = F::one() / F::lit(b as f64);

    let mut z1s = Vec::with_capacity(b);
    let mut z0s = Vec::with_capacity(b);
    let mut caches = Vec::with_capacity(b);
    for (x0, draw) in batch.x0.iter().zip(batch.draws) {
        let x_t = q_sample(x0, draw.t, &draw.noise, schedule)?;
        let (z1, cache) = main.denoise_with_cache(&x_t, draw.t)?;
        z0s.push(weak.denoise(&x_t, draw.t)?);
        z1s.push(z1);
        caches.push(cache);
    }

    let scaling = match (&frozen.scaling, source) {
        (Some(s), _) => *s,
        (None, WeightSource::Learned(g)) if !g.raw_tail_score => {
            let scores = z1s.iter().map(|z| tail_score(z, batch.tail)).collect::<Result<Vec<F>>>()?;
            TailScaling::from_batch(&scores)
        }
        _ => TailScaling::Raw,
    };

    let mut passes = Vec::with_capacity(b);
    let mut weights = Vec::with_capacity(b);
    let mut fed = Vec::with_capacity(b);
    let mut fused = Vec::with_capacity(b);
    for (z1, z0) in z1s.iter().zip(&z0s) {
        let w = match source {
            WeightSource::Learned(g) => {
                let pass = g.forward(z1, z0, batch.tail, &scaling)?;
                let w = pass.w;
                fed.push(pass.fed);
                passes.push(pass);
                w
            }
            WeightSource::Constant(w) => {
                fed.push([F::zero(); 3]);
                w
            }
        };
        let z = fuse(z1, z0, w)?;
        let worst = z.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
        if !(worst <= BLOWUP_LIMIT) {
            return Err(Error::GuidanceBlowup { step: 0, magnitude: worst });
        }
        weights.push(w);
        fused.push(z);
    }

    let mut base = F::zero();
    let mut ag = F::zero();
    let mut grad_fused = Vec::with_capacity(b);
    let mut grad_z1 = Vec::with_capacity(b);
    for ((z1, z), x0) in z1s.iter().zip(&fused).zip(batch.x0) {
        let (lb, mut gb) = reconstruction_error(z1, x0);
        base += lb;
        gb.iter_mut().for_each(|v| *v *= scale);
        grad_z1.push(gb);
        let (la, ga) = reconstruction_error(z, x0);
        ag += la;
        grad_fused.push(ga.into_iter().map(|v| settings.lambda_ag * v * scale).collect::<Vec<F>>());
    }
    base *= scale;
    ag *= scale;

    let mut thresholds = Vec::with_capacity(b);
    let mut softs = Vec::with_capacity(b);
    for (u, (z, x0)) in fused.iter().zip(batch.x0).enumerate() {
        let seen: Vec<bool> = x0.iter().map(|v| *v > F::zero()).collect();
        let fixed = frozen.thresholds.as_ref().map(|t| t[u]);
        let soft = rec_distribution_soft(z, settings.pop_k, batch.bins, settings.tau_pop, Some(&seen), fixed)?;
        thresholds.push(soft.threshold);
        softs.push(soft);
    }
    let rs: Vec<[F; 3]> = softs.iter().map(|s| s.r).collect();
    let pop = pop_loss(&rs, batch.target)?;
    if !settings.lambda_pop.is_zero() {
        for ((soft, g_r), gf) in softs.iter().zip(&pop.grads).zip(grad_fused.iter_mut()) {
            for (acc, d) in gf.iter_mut().zip(soft.backward(g_r, batch.bins)) {
                *acc += settings.lambda_pop * d;
            }
        }
    }

    let mut main_grads = NetGrads::zeros_like(&main.net);
    let mut aan_grads = match source {
        WeightSource::Learned(g) => Some(NetGrads::zeros_like(&g.net)),
        WeightSource::Constant(_) => None,
    };
    for u in 0..b {
        let w = weights[u];
        let g_fused = &grad_fused[u];
        let gz1 = &mut grad_z1[u];
        for (acc, &g) in gz1.iter_mut().zip(g_fused) {
            *acc += w * g;
        }
        if let (WeightSource::Learned(g), Some(acc)) = (source, aan_grads.as_mut()) {
            let grad_w: F = g_fused.iter().zip(z1s[u].iter().zip(&z0s[u])).map(|(&gf, (&a, &c))| gf * (a - c)).sum();
            let extra = g.backward(&passes[u], grad_w, batch.tail, acc)?;
            for (a, e) in gz1.iter_mut().zip(extra) {
                *a += e;
            }
        }
        main.backward_accumulate(&caches[u], gz1, &mut main_grads)?;
    }

    let total = base + settings.lambda_ag * ag + settings.lambda_pop * pop.total;
    if !total.is_finite() {
        return Err(Error::NonFiniteLoss(format!("joint loss = {total}")));
    }
    Ok(JointEval {
        total,
        base,
        ag,
        pop: pop.total,
        pop_terms: [pop.over_high, pop.under_low, pop.balance],
        weights,
        fed,
        thresholds,
        scaling,
        main_grads,
        aan_grads,
    })
}
