//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use idtqc::channels::{cf_frame_apply, isi_apply, CfScene, IsiChannel, SceneModel};
use idtqc::galois::{Field, Poly, PolyMatrix};
use idtqc::idt::{actual_rate_fraction, transmit, unframe_and_transform, IdtConfig, PamMap};
use idtqc::qc_ldpc::{CodeParams, QcCode};
use idtqc::rates::{comp_rate_frame, derive_seed, monte_carlo_rates, RateCurve, RateQuery};
use idtqc::receivers::{central_recover, isi_receive, relay_receive_frame, FunctionDecode, ISI_BP_ITERS};
use idtqc_cli::config::{StopRule, SymbolSceneSpec};
use idtqc_cli::sweep::{ber_sweep, CfSymbolTrial, IsiTrial};
use idtqc_cli::Snr;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn paper_code() -> QcCode {
    CodeParams {
        p: 2,
        b: 32,
        check_rows: 8,
        l: 128,
        seed: 1,
    }
    .build()
    .expect("paper-scale code")
}

fn desk_code() -> QcCode {
    CodeParams {
        p: 2,
        b: 16,
        check_rows: 4,
        l: 64,
        seed: 1,
    }
    .build()
    .expect("desk code")
}

fn random_info<R: Rng>(cfg: &IdtConfig, p: u32, rng: &mut R) -> Vec<u32> {
    (0..cfg.info_len()).map(|_| rng.gen_range(0..p)).collect()
}

fn shift(c: &[u32], t: usize) -> Vec<u32> {
    let n = c.len();
    (0..n).map(|i| c[(i + n - t % n) % n]).collect()
}

fn c01_actual_rates() -> Verdict {
    let start = Instant::now();
    let p2p = IdtConfig::new(32, 128, 1, 1, 24).unwrap();
    let (n1, d1) = actual_rate_fraction(&p2p, 3072, 1);
    let cf = IdtConfig::new(32, 128, 5, 2, 24).unwrap();
    let (n2, d2) = actual_rate_fraction(&cf, 3072, 2);
    let elapsed = start.elapsed();
    let (r1, r2) = (n1 as f64 / d1 as f64, n2 as f64 / d2 as f64);
    let ok1 = (r1 - 0.742).abs() <= 0.0005;
    let ok2 = (r2 - 0.685).abs() <= 0.0005;
    verdict(
        ok1 && ok2 && elapsed < Duration::from_millis(1),
        format!(
            "R_a(D=1,S=1) = {n1}/{d1} = {r1:.6} vs 0.742 [{}]; R_a(D=5,S=2) = {n2}/{d2} = {r2:.6} vs 0.685 [{}]; {elapsed:?}",
            if ok1 { "ok" } else { "off" },
            if ok2 { "ok" } else { "off" }
        ),
    )
}

fn c02_algebra() -> Verdict {
    let f2 = Field::binary();
    let l = 8;
    let mono = |c: u32, d: usize| Poly::monomial(f2, c, d, l);
    let m = PolyMatrix::new(f2, 2, 2, vec![mono(1, 1), mono(1, 0), mono(1, 0), mono(1, 1)]).unwrap();
    let det_ok = m.det(l).unwrap() == Poly::new(f2, [1, 0, 1, 0, 0, 0, 0, 0]);
    let adj_ok = m.adjugate(l).unwrap() == m;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut bad = 0;
    for t in 0..1200 {
        let field = Field::new(if t % 2 == 0 { 2 } else { 5 }).unwrap();
        let n = 1 + t % 3;
        let len = 6;
        let m = PolyMatrix::from_fn(field, n, n, |_, _| {
            Poly::new(field, (0..3).map(|_| rng.gen_range(0..field.p())).chain([0; 3]))
        })
        .unwrap();
        let lhs = m.adjugate(len).unwrap().mul(&m, len).unwrap();
        let det = m.det(len).unwrap();
        let rhs = PolyMatrix::from_fn(field, n, n, |i, j| {
            if i == j {
                det.clone()
            } else {
                Poly::zero(field, len)
            }
        })
        .unwrap();
        checked += 1;
        bad += (lhs != rhs) as usize;
    }
    verdict(
        det_ok && adj_ok && bad == 0,
        format!("det = 1+D^2: {det_ok}; adj = M: {adj_ok}; adj*M = det*I on {checked} random matrices, {bad} violations"),
    )
}

fn c03_homomorphism() -> Verdict {
    let start = Instant::now();
    let mut bad = 0;
    let mut pairs = 0;
    for p in [2u32, 3, 5, 7] {
        let f = Field::new(p).unwrap();
        let off = PamMap::fold_offset(f);
        for u in 0..p {
            for v in 0..p {
                pairs += 1;
                let (mu, mv) = (PamMap::lift(f, u) + off, PamMap::lift(f, v) + off);
                if PamMap::fold(f, mu + mv) != f.add(u, v) || PamMap::fold(f, mu * mv) != f.mul(u, v) {
                    bad += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad == 0 && elapsed < Duration::from_secs(1),
        format!("sum and product preserved on {pairs} pairs over p in {{2,3,5,7}}, {bad} violations; {elapsed:?}"),
    )
}

fn c04_delay_to_shift() -> Verdict {
    let mut cases = 0;
    let mut bad = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for b in [2usize, 4] {
        for l in [8usize, 16] {
            let code = CodeParams {
                p: 2,
                b,
                check_rows: b / 2,
                l,
                seed: 11,
            }
            .build()
            .unwrap();
            let pam = PamMap::new(code.field(), 1.0).unwrap();
            for d_max in [1usize, 2] {
                let cfg = IdtConfig::new(b, l, d_max, 1, code.message_blocks()).unwrap();
                for _ in 0..100 {
                    let (c, x) = transmit(&code, &cfg, &pam, &random_info(&cfg, 2, &mut rng)).unwrap();
                    for tau in 0..=d_max {
                        let mut y = vec![0.0; tau];
                        y.extend(&x);
                        y.resize(cfg.frame_len() + d_max, 0.0);
                        let out = unframe_and_transform(&y, &cfg, tau, pam.frozen_amplitude()).unwrap();
                        let got: Vec<u32> = out.iter().map(|&v| pam.unmap(v)).collect();
                        cases += 1;
                        if got != shift(&c, b * tau) || !code.is_codeword(&got) {
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    verdict(bad == 0, format!("{cases} delayed frames mapped to c^(b tau), {bad} mismatches"))
}

fn c05_qc_closure() -> Verdict {
    let start = Instant::now();
    let code = paper_code();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..100 {
        let w: Vec<u32> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let c = code.encode(&w).unwrap();
        bad += !code.verify_qc_closure(&c) as usize;
    }
    let elapsed = start.elapsed();
    verdict(
        bad == 0 && elapsed < Duration::from_secs(60),
        format!(
            "N'={} K={} b=32: 100 codewords closed under all 128 shifts by b, {bad} failures; {elapsed:?}",
            code.n(),
            code.k()
        ),
    )
}

fn c06_noiseless_end_to_end() -> Verdict {
    let start = Instant::now();
    let code = paper_code();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let cfg = IdtConfig::new(32, 128, 1, 1, code.message_blocks()).unwrap();
    let pam = PamMap::new(code.field(), 1.0).unwrap();
    let ch = IsiChannel::dicode(0.0);
    let mut isi_bad = 0;
    for _ in 0..1000 {
        let w = random_info(&cfg, 2, &mut rng);
        let (_, x) = transmit(&code, &cfg, &pam, &w).unwrap();
        let y = isi_apply(&x, &ch, &mut rng);
        let out = isi_receive(&y, &ch, &code, &cfg, &pam, ISI_BP_ITERS).unwrap();
        isi_bad += (!out.is_recovered() || out.estimate() != &w[..]) as usize;
    }

    let cfg2 = IdtConfig::new(32, 128, 1, 2, code.message_blocks()).unwrap();
    let scene = CfScene {
        sources: 2,
        relays: 2,
        power: 1.0,
        h: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        tau: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        d_max: 1,
        model: SceneModel::Frame,
        noise_std: 0.0,
    };
    let mut cf_bad = 0;
    for _ in 0..1000 {
        let infos = [random_info(&cfg2, 2, &mut rng), random_info(&cfg2, 2, &mut rng)];
        let frames: Vec<Vec<f64>> = infos.iter().map(|w| transmit(&code, &cfg2, &pam, w).unwrap().1).collect();
        let mut funcs = Vec::new();
        for m in 0..2 {
            let y = cf_frame_apply(&frames, &scene, m, &mut rng).unwrap();
            match relay_receive_frame(&y, &scene, m, &[1, 1], &code, &cfg2, &pam, ISI_BP_ITERS).unwrap() {
                FunctionDecode::Decoded(f) => funcs.push(f),
                FunctionDecode::Outage(_) => {}
            }
        }
        let ok = funcs.len() == 2 && central_recover(&funcs, &code, &cfg2).map_or(false, |r| r == infos);
        cf_bad += !ok as usize;
    }
    let elapsed = start.elapsed();
    verdict(
        isi_bad == 0 && cf_bad == 0 && elapsed < Duration::from_secs(60),
        format!("dicode: 1000 messages, {isi_bad} errors; B = [[D,1],[1,D]]: 1000 message pairs, {cf_bad} errors; {elapsed:?}"),
    )
}

fn c07_rate_loss_envelope() -> Verdict {
    type Q = Ratio<i128>;
    let mut bad = Vec::new();
    for d in [1usize, 5] {
        for (b, mb) in [(4usize, 3usize), (32, 24), (1024, 768)] {
            let r = Q::new(mb as i128, b as i128);
            let two_minus_r = Q::from_integer(2) - r;
            let mut prev_scaled = Q::from_integer(0);
            for e in 1..=6u32 {
                let l = 10usize.pow(e);
                let cfg = IdtConfig::new(b, l, d, 1, mb).unwrap();
                let (num, den) = actual_rate_fraction(&cfg, mb * l, 1);
                let ra = Q::new(num as i128, den as i128);
                let lq = Q::from_integer(l as i128);
                let dq = Q::from_integer(d as i128);
                let loss = Q::from_integer(1) - ra / r;
                let closed = two_minus_r * dq / (lq + (Q::from_integer(1) - r) * dq);
                let scaled = loss * lq;
                let gap = two_minus_r * dq - scaled;
                let gap_exact = two_minus_r * (Q::from_integer(1) - r) * dq * dq / (lq + (Q::from_integer(1) - r) * dq);
                let ok = loss == closed
                    && loss > Q::from_integer(0)
                    && loss <= two_minus_r * dq / lq
                    && gap == gap_exact
                    && scaled > prev_scaled;
                if !ok {
                    bad.push(format!("b={b} D={d} L={l}"));
                }
                prev_scaled = scaled;
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "1 - R_a/R_d = (2-r)D/(L+(1-r)D) exactly, within (2-r)D/L, L*loss -> (2-r)D, for L = 10..10^6; failures: {bad:?}"
        ),
    )
}

fn c08_rate_curves() -> Verdict {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for s in [2usize, 3] {
        let curve = RateCurve {
            sources: s,
            relays: s,
            power: 10.0,
            d_max: (0..=5).collect(),
            n_realizations: 10_000,
            a_bound: None,
            p: 2,
        };
        let pts = monte_carlo_rates(&curve, 2024).unwrap();
        let means: Vec<f64> = pts.iter().map(|p| p.mean_rate).collect();
        let inc: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
        let monotone = inc.iter().all(|&d| d >= 0.0);
        let first_largest = inc.iter().skip(1).all(|&d| d < inc[0]);
        pass &= monotone && first_largest;
        details.push(format!(
            "S=M={s}: means {:?} (non-decreasing: {monotone}, 0->1 largest: {first_largest})",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>()
        ));
    }
    let elapsed = start.elapsed();
    verdict(pass && elapsed < Duration::from_secs(60), format!("{}; {elapsed:?}", details.join("; ")))
}

fn strictly_decreasing(pts: &[idtqc_cli::BerPoint]) -> bool {
    pts.windows(2).all(|w| w[1].ber < w[0].ber) && pts.iter().all(|p| p.frame_errors >= 100)
}

fn c09_ber_shape() -> Verdict {
    let start = Instant::now();
    let stop = StopRule {
        min_frame_errors: 100,
        max_frames: 200_000,
    };
    let isi = IsiTrial::new(desk_code(), vec![1, 1], ISI_BP_ITERS).unwrap();
    let isi_grid = [Snr::Db(5.6), Snr::Db(5.9), Snr::Db(6.2)];
    let isi_pts = ber_sweep(&isi_grid, stop, 91, isi.bits_per_frame(), |s, r| isi.run(s, r)).unwrap();
    let isi_ok = strictly_decreasing(&isi_pts);

    let spec = SymbolSceneSpec {
        h: [1.0, 1.0],
        tau: 0.5,
        d_max: 5,
    };
    let sym = CfSymbolTrial::new(desk_code(), spec.clone(), 40, 5).unwrap();
    let sym_grid = [Snr::Db(4.0), Snr::Db(4.5), Snr::Db(5.0)];
    let sym_pts = ber_sweep(&sym_grid, stop, 92, sym.bits_per_frame(), |s, r| sym.run(s, r)).unwrap();
    let sym_ok = strictly_decreasing(&sym_pts);

    // BER(tau_s) at fixed SNR with frame-level standard errors
    let frames = 240u64;
    let snr = Snr::Db(4.5);
    let taus = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut stats = Vec::new();
    for (i, &tau) in taus.iter().enumerate() {
        let t = CfSymbolTrial::new(desk_code(), SymbolSceneSpec { tau, ..spec.clone() }, 40, 5).unwrap();
        let per_frame: Vec<f64> = (0..frames)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(93, i as u64, k));
                t.run(snr, &mut rng).unwrap().bit_errors as f64 / t.bits_per_frame() as f64
            })
            .collect();
        let mean = per_frame.iter().sum::<f64>() / frames as f64;
        let var = per_frame.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (frames - 1) as f64;
        stats.push((tau, mean, (var / frames as f64).sqrt()));
    }
    let mut sym_tau_ok = true;
    let mut pairs = Vec::new();
    for k in 0..4 {
        let (a, b) = (stats[k], stats[8 - k]);
        let tol = 3.0 * (a.2 * a.2 + b.2 * b.2).sqrt();
        let ok = (a.1 - b.1).abs() <= tol;
        sym_tau_ok &= ok;
        pairs.push(format!("{:.1}/{:.1}: {:.2e} vs {:.2e} (tol {:.1e})", a.0, b.0, a.1, b.1, tol));
    }
    let fmt = |pts: &[idtqc_cli::BerPoint]| {
        pts.iter()
            .map(|p| format!("{} dB {:.2e} ({} fe)", p.snr_db, p.ber, p.frame_errors))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let elapsed = start.elapsed();
    verdict(
        isi_ok && sym_ok && sym_tau_ok,
        format!(
            "dicode N'=1024: {} [{isi_ok}]; symbol-async tau=0.5 D_max=5: {} [{sym_ok}]; BER(tau_s) at 4.5 dB: {} [{sym_tau_ok}]; {elapsed:?}",
            fmt(&isi_pts),
            fmt(&sym_pts),
            pairs.join("; ")
        ),
    )
}

fn c10_spot_rate() -> Verdict {
    let r = comp_rate_frame(&RateQuery {
        h: vec![1.0, 1.0],
        a: vec![1, 1],
        power: 1.0,
    })
    .unwrap();
    let want = 0.5 * 1.5f64.log2();
    verdict((r - want).abs() <= 1e-12, format!("{r:.15} vs 1/2 log2(1.5) = {want:.15}"))
}

fn c11_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_idtqc");
    let cases = [
        ("isi-ber", r#"{"snr_db": [5.5, 6.0], "stop": {"min_frame_errors": 20, "max_frames": 400}, "seed": 7}"#),
        ("cf-frame-ber", r#"{"snr_db": [4.0], "stop": {"min_frame_errors": 10, "max_frames": 200}, "seed": 8}"#),
        ("rates", r#"{"rates": {"sources": 2, "relays": 2, "P": 10.0, "d_max": [0, 1, 2], "n_realizations": 500}, "seed": 9}"#),
    ];
    let mut same = Vec::new();
    for (cmd, json) in cases {
        let cfg = dir.path().join(format!("{cmd}.json"));
        std::fs::write(&cfg, json).unwrap();
        let mut outputs = Vec::new();
        for workers in [1, 4] {
            let out = dir.path().join(format!("{cmd}-{workers}.csv"));
            let status = std::process::Command::new(bin)
                .args([cmd, "--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out)
                .args(["--workers", &workers.to_string()])
                .output()
                .unwrap();
            assert!(status.status.success(), "{cmd}: {}", String::from_utf8_lossy(&status.stderr));
            outputs.push(std::fs::read(&out).unwrap());
        }
        same.push((cmd, outputs[0] == outputs[1] && !outputs[0].is_empty()));
    }
    verdict(
        same.iter().all(|s| s.1),
        format!("byte-identical CSV for 1 vs 4 workers: {same:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("actual rate values", c01_actual_rates),
        ("Example 1 and adj*M = det*I", c02_algebra),
        ("mapping homomorphism", c03_homomorphism),
        ("delay becomes circular shift", c04_delay_to_shift),
        ("QC closure of the N'=4096 code", c05_qc_closure),
        ("noiseless end to end", c06_noiseless_end_to_end),
        ("rate-loss 1/L envelope", c07_rate_loss_envelope),
        ("rate curves vs D_max", c08_rate_curves),
        ("BER shape at desk scale", c09_ber_shape),
        ("computation-rate spot value", c10_spot_rate),
        ("worker-count determinism", c11_determinism),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let v = check();
        println!("criterion {n:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
