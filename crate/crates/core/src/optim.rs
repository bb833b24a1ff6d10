//! Bounded Nelder–Mead simplex minimiser.

#[derive(Debug, Clone)]
pub(crate) struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    fn project(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[k], self.upper[k]);
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Options {
    pub max_iterations: usize,
    /// Relative spread of simplex values at which to stop.
    pub f_tolerance: f64,
    /// Simplex diameter (in parameter units) at which to stop.
    pub x_tolerance: f64,
    /// Initial edge length along each coordinate.
    pub initial_step: f64,
    /// Number of times the simplex is rebuilt around the best point.
    pub rebuilds: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn minimize<F>(mut f: F, start: &[f64], bounds: &Bounds, opts: &Options) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let mut x0 = start.to_vec();
    bounds.project(&mut x0);
    let mut best = Minimum { f: f(&x0), x: x0, iterations: 0, converged: false };
    let mut step = opts.initial_step;
    for _ in 0..=opts.rebuilds {
        let budget = opts.max_iterations.saturating_sub(best.iterations);
        if budget == 0 {
            break;
        }
        let run = simplex(&mut f, &best.x, step, bounds, opts, budget);
        let improved = run.f < best.f - opts.f_tolerance * best.f.abs();
        let iterations = best.iterations + run.iterations;
        if run.f <= best.f {
            best = Minimum { iterations, ..run };
        } else {
            best.iterations = iterations;
            best.converged = run.converged;
        }
        if !improved && best.converged {
            break;
        }
        step *= 0.5;
    }
    best
}

fn simplex<F>(f: &mut F, start: &[f64], step: f64, bounds: &Bounds, opts: &Options, budget: usize) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = start.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    pts.push(start.to_vec());
    for k in 0..dim {
        let mut p = start.to_vec();
        // Step away from the nearer bound so the vertex stays distinct after projection.
        let room_up = bounds.upper[k] - p[k];
        p[k] += if room_up >= step { step } else { -step };
        bounds.project(&mut p);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=dim).collect();

    let mut iterations = 0;
    let mut converged = false;
    let eval = |f: &mut F, p: &mut Vec<f64>| {
        bounds.project(p);
        f(p)
    };

    while iterations < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (ib, iw, isw) = (order[0], order[dim], order[dim - 1]);
        let fb = vals[ib];
        let spread = vals[iw] - fb;
        let diameter = pts
            .iter()
            .map(|p| p.iter().zip(&pts[ib]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (fb.is_finite() && spread <= opts.f_tolerance * fb.abs() + f64::MIN_POSITIVE)
            || diameter <= opts.x_tolerance
        {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for &k in &order[..dim] {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&pts[iw]).map(|(c, w)| c + t * (c - w)).collect()
        };

        let mut xr = along(REFLECT);
        let fr = eval(f, &mut xr);
        if fr < fb {
            let mut xe = along(EXPAND);
            let fe = eval(f, &mut xe);
            if fe < fr {
                pts[iw] = xe;
                vals[iw] = fe;
            } else {
                pts[iw] = xr;
                vals[iw] = fr;
            }
            continue;
        }
        if fr < vals[isw] {
            pts[iw] = xr;
            vals[iw] = fr;
            continue;
        }
        let (mut xc, outside) = if fr < vals[iw] { (along(CONTRACT), true) } else { (along(-CONTRACT), false) };
        let fc = eval(f, &mut xc);
        if (outside && fc <= fr) || (!outside && fc < vals[iw]) {
            pts[iw] = xc;
            vals[iw] = fc;
            continue;
        }
        let anchor = pts[ib].clone();
        for k in 0..=dim {
            if k == ib {
                continue;
            }
            let mut p: Vec<f64> = anchor.iter().zip(&pts[k]).map(|(a, v)| a + SHRINK * (v - a)).collect();
            vals[k] = eval(f, &mut p);
            pts[k] = p;
        }
    }

    let ib = (0..=dim).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Minimum { x: pts[ib].clone(), f: vals[ib], iterations, converged }
}
