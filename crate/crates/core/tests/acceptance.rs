//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances are pinned here.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vbquant_core::conventions::{DIRAC_SIGN, MONOPOLE_HOLONOMY_SIGN};
use vbquant_core::fiberq::{quantize_group, QuantumFiber};
use vbquant_core::gauge::{
    connection_quadrature, connection_rep, gauge_residual, lift_orthogonality_residual, BaseChart, BasePoint,
    BaseTangent, GaugeModel, LieAlgebraRep, RepConnection,
};
use vbquant_core::numerics::{cis, hermitian_eigenvalues, matrix_exp, ComplexMatrix};
use vbquant_core::orbit::{moment_hamiltonian, ChartPoint, OrbitSpec, ProductHamiltonian};
use vbquant_core::su2::{Su2, Su2Group};
use vbquant_core::transport::{
    covariant_residual_total_space, default_fiber_samples, transport, wilson_loop, BasePath, ChartPolicy,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(measured: f64, tol: f64) -> bool {
    measured.is_finite() && measured <= tol
}

fn fiber(two_j: u32) -> QuantumFiber {
    QuantumFiber::new(OrbitSpec::new(two_j)).expect("fiber")
}

fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen_range(-scale..scale))
}

fn rand_group(rng: &mut ChaCha8Rng) -> Su2Group {
    Su2(rand_vec(rng, 3.0)).exp()
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn gram_oracle() -> Outcome {
    const TOL: f64 = 1e-10;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for two_j in 0..=10 {
        worst = worst.max(fiber(two_j).basis.gram_relative_error());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: check(worst, TOL) && secs < 1.0,
        detail: format!("max rel err {worst:.2e} (tol {TOL:.0e}), {secs:.3} s (limit 1 s)"),
    }
}

fn spectrum() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for two_j in 1..=4 {
        let f = fiber(two_j);
        let j = f.spec().j();
        for _ in 0..10 {
            let a = unit(rand_vec(&mut rng, 1.0));
            let o = f.prequant(&moment_hamiltonian(&f.spec(), a)).expect("prequant");
            let eig = hermitian_eigenvalues(&o.matrix).expect("eig");
            for (k, e) in eig.iter().enumerate() {
                worst = worst.max((e - (-j + k as f64)).abs());
            }
        }
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("max eigenvalue deviation {worst:.2e} (tol {TOL:.0e})"),
    }
}

fn dirac() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fibers: Vec<QuantumFiber> = (1..=5).map(fiber).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let f = &fibers[i % 5];
        let (a, b) = (rand_vec(&mut rng, 1.0), rand_vec(&mut rng, 1.0));
        let spec = f.spec();
        let oa = f.prequant(&moment_hamiltonian(&spec, a)).expect("prequant").matrix;
        let ob = f.prequant(&moment_hamiltonian(&spec, b)).expect("prequant").matrix;
        let oc = f.prequant(&moment_hamiltonian(&spec, cross(a, b))).expect("prequant").matrix;
        let rhs = oc.scale(Complex64::new(0.0, DIRAC_SIGN));
        worst = worst.max((&oa.commutator(&ob) - &rhs).max_abs());
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("s_D = {DIRAC_SIGN:+}, max deviation {worst:.2e} over 100 pairs (tol {TOL:.0e})"),
    }
}

fn horizontal_lift() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = fiber(2);
    let mono = GaugeModel::monopole(f.spec(), 1).expect("model");
    let cons = GaugeModel::constant(f.spec(), Su2([0.8, -0.3, 0.5]), Su2([-0.2, 1.0, 0.4])).expect("model");
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (m, b) = if i % 2 == 0 {
            let theta = rng.gen_range(0.3..2.8);
            let chart = if theta < PI / 2.0 { BaseChart::North } else { BaseChart::South };
            (&mono, BasePoint::new(chart, [theta, rng.gen_range(0.0..2.0 * PI)], [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
        } else {
            (&cons, BasePoint::new(BaseChart::Global, [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
        };
        let v = BaseTangent::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let z = ChartPoint::north(Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
        let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        worst = worst.max(lift_orthogonality_residual(m, &f.geom, &b, &v, &z, xi).expect("lift"));
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("max |d beta(v#, xi)| {worst:.2e} over 100 samples (tol {TOL:.0e})"),
    }
}

fn polarization() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for two_j in 0..=5 {
        let f = fiber(two_j);
        for _ in 0..10 {
            worst = worst.max(f.polarization_residual(&moment_hamiltonian(&f.spec(), rand_vec(&mut rng, 1.0))));
        }
    }
    let f = fiber(2);
    let h3 = moment_hamiltonian(&f.spec(), [0.0, 0.0, 1.0]);
    let quad = f.polarization_residual(&ProductHamiltonian(h3, h3));
    let floor = worst.max(f64::EPSILON);
    Outcome {
        pass: check(worst, TOL) && quad >= 1e3 * floor,
        detail: format!("moment max {worst:.2e} (tol {TOL:.0e}); quadratic {quad:.2e}, ratio {:.1e} (need >= 1e3)", quad / floor),
    }
}

fn gauge_law() -> Outcome {
    const TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = fiber(2);
    let mono = GaugeModel::monopole(f.spec(), 1).expect("model");
    let pure = GaugeModel::pure_gauge(f.spec(), Su2(rand_vec(&mut rng, 1.0)), Su2(rand_vec(&mut rng, 1.0))).expect("model");
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let v = BaseTangent::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), 0.0]);
        let r = if i % 2 == 0 {
            let b = BasePoint::new(BaseChart::North, [rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..2.0 * PI)], [0.0; 2]);
            gauge_residual(&mono, &f, BaseChart::North, BaseChart::South, &b, &v)
        } else {
            let b = BasePoint::new(BaseChart::Global, [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)], [0.0; 2]);
            gauge_residual(&pure, &f, BaseChart::Global, BaseChart::Regauged, &b, &v)
        };
        worst = worst.max(r.expect("gauge residual"));
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("max operator-norm residual {worst:.2e} over 50 samples (tol {TOL:.0e})"),
    }
}

fn equivalence() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for two_j in 0..=4 {
        let f = fiber(two_j);
        let rep = LieAlgebraRep::from_transitions(&f.basis);
        let models = [
            GaugeModel::constant(f.spec(), Su2(rand_vec(&mut rng, 1.0)), Su2(rand_vec(&mut rng, 1.0))).expect("model"),
            GaugeModel::monopole(f.spec(), 1).expect("model"),
            GaugeModel::regauged(
                f.spec(),
                Su2(rand_vec(&mut rng, 1.0)),
                Su2(rand_vec(&mut rng, 1.0)),
                Su2(rand_vec(&mut rng, 1.0)),
                Su2(rand_vec(&mut rng, 1.0)),
            )
            .expect("model"),
        ];
        for i in 0..20 {
            let m = &models[i % 3];
            let b = match i % 3 {
                1 => {
                    let theta = rng.gen_range(0.1..PI - 0.1);
                    let chart = if rng.gen_bool(0.5) { BaseChart::North } else { BaseChart::South };
                    BasePoint::new(chart, [theta, rng.gen_range(0.0..2.0 * PI)], [0.0; 2])
                }
                k => {
                    let chart = if k == 2 && rng.gen_bool(0.5) { BaseChart::Regauged } else { BaseChart::Global };
                    BasePoint::new(chart, [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], [0.0; 2])
                }
            };
            let v = BaseTangent::new([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            let aq = connection_quadrature(m, &f, &b, &v).expect("quadrature").matrix;
            let ar = connection_rep(m, &rep, &b, &v).expect("rep").matrix;
            worst = worst.max((&aq - &ar).norm_op());
            count += 1;
        }
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("max ||A_quad - A_rep|| {worst:.2e} over {count} samples (tol {TOL:.0e})"),
    }
}

fn monopole_holonomy() -> Outcome {
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for two_j in [1u32, 2, 4] {
        let f = fiber(two_j);
        let m = GaugeModel::monopole(f.spec(), 1).expect("model");
        let c = RepConnection::new(&m, &f);
        let j = f.spec().j();
        for theta in [PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0] {
            let w = wilson_loop(&c, &BasePath::latitude(theta, 10_000).expect("path")).expect("loop");
            let omega = 2.0 * PI * (1.0 - theta.cos());
            let want: Vec<Complex64> = (0..f.dim()).map(|k| cis(MONOPOLE_HOLONOMY_SIGN * (j - k as f64) * omega)).collect();
            worst = worst.max((&w.unitary - &ComplexMatrix::from_diag(&want)).max_abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: check(worst, TOL) && secs < 10.0,
        detail: format!("max phase deviation {worst:.2e} (tol {TOL:.0e}), {secs:.2} s (limit 10 s)"),
    }
}

fn non_abelian() -> Outcome {
    const TOL: f64 = 1e-8;
    let f = fiber(1);
    let m = GaugeModel::constant(f.spec(), Su2::basis(0), Su2::basis(1)).expect("model");
    let c = RepConnection::new(&m, &f);
    let len = 1.3;
    let seg = transport(&c, &BasePath::segment([0.0; 2], [len, 0.0], [0.0; 2], [0.0; 2], 500).expect("path")).expect("transport");
    let want = matrix_exp(&c.rep.generators[0].scale_real(len)).expect("expm");
    let err = (&seg.unitary - &want).max_abs();
    let corner = |first: [f64; 2]| {
        BasePath::polyline(&[([0.0; 2], [0.0; 2]), (first, [0.0; 2]), ([1.0, 1.0], [0.0; 2])], 500).expect("path")
    };
    let u1 = transport(&c, &corner([1.0, 0.0])).expect("transport").unitary;
    let u2 = transport(&c, &corner([0.0, 1.0])).expect("transport").unitary;
    let gap = (&u1 - &u2).norm_op();
    Outcome {
        pass: check(err, TOL) && gap > 0.1,
        detail: format!("segment vs expm {err:.2e} (tol {TOL:.0e}); ordering gap {gap:.3} (need > 0.1)"),
    }
}

fn total_space() -> Outcome {
    const TOL: f64 = 1e-5;
    let samples = default_fiber_samples();
    let mut clean: f64 = 0.0;
    let mut dirty = f64::INFINITY;
    let f = fiber(1);
    let mono = GaugeModel::monopole(f.spec(), 1).expect("model");
    let cons = GaugeModel::constant(f.spec(), Su2([0.6, -0.4, 0.9]), Su2([0.1, 0.7, -0.3])).expect("model");
    let cases = [
        (&mono, BasePath::latitude(PI / 3.0, 1000).expect("path")),
        (&cons, BasePath::segment([0.0, 0.0], [1.0, -0.6], [0.3, 0.2], [-0.5, 1.0], 1000).expect("path")),
    ];
    for (m, path) in cases {
        let c = RepConnection::new(m, &f);
        let mut r = transport(&c, &path).expect("transport");
        let res = covariant_residual_total_space(&c, &f, &path, &r, &samples).expect("residual");
        clean = clean.max(res);
        for fr in r.frames.iter_mut() {
            fr.phase += 1e-2 * fr.s;
        }
        let bad = covariant_residual_total_space(&c, &f, &path, &r, &samples).expect("residual");
        dirty = dirty.min(bad / res.max(f64::EPSILON));
    }
    Outcome {
        pass: check(clean, TOL) && dirty >= 10.0,
        detail: format!("max residual {clean:.2e} (tol {TOL:.0e}); corruption raises it {dirty:.1e}x (need >= 10)"),
    }
}

fn rk4_order() -> Outcome {
    let f = fiber(2);
    let m = GaugeModel::monopole(f.spec(), 1).expect("model");
    let c = RepConnection::new(&m, &f);
    let run = |steps: usize| {
        let path = BasePath::segment([0.4, 0.0], [1.4, 4.0], [0.0; 2], [0.0; 2], steps)
            .expect("path")
            .with_charts(ChartPolicy::Fixed(BaseChart::North));
        transport(&c, &path).expect("transport").unitary
    };
    let reference = run(1_000_000);
    let e1 = (&run(40) - &reference).max_abs();
    let e2 = (&run(80) - &reference).max_abs();
    let ratio = e1 / e2;
    Outcome {
        pass: (12.0..=20.0).contains(&ratio),
        detail: format!("errors {e1:.2e} -> {e2:.2e}, ratio {ratio:.2} (need [12, 20])"),
    }
}

fn representation() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let fibers: Vec<QuantumFiber> = (1..=6).map(fiber).collect();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let f = &fibers[i % 6];
        let (g1, g2) = (rand_group(&mut rng), rand_group(&mut rng));
        let lhs = quantize_group(&f.basis, &(g1 * g2));
        let rhs = &quantize_group(&f.basis, &g1) * &quantize_group(&f.basis, &g2);
        worst = worst.max((&lhs - &rhs).max_abs());
    }
    Outcome {
        pass: check(worst, TOL),
        detail: format!("max |X(g1 g2) - X(g1) X(g2)| {worst:.2e} over 100 pairs, two_j 1..6 (tol {TOL:.0e})"),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("gram oracle", gram_oracle),
        ("spectrum without half-form shift", spectrum),
        ("Dirac condition", dirac),
        ("horizontal lift orthogonality", horizontal_lift),
        ("polarization preservation", polarization),
        ("gauge law", gauge_law),
        ("quadrature vs representation connection", equivalence),
        ("monopole holonomy", monopole_holonomy),
        ("non-abelian transport", non_abelian),
        ("total-space covariant constancy", total_space),
        ("RK4 order", rk4_order),
        ("representation property", representation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        if !out.pass {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {}", i + 1, out.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
