//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use framestamp::adversary::{edit_input_log, interarrival_stats, skew_run, SkewFactor};
use framestamp::authstamp::{
    record, record_frames, signature_pixels, verify_bundle, verify_bytes, KeyPair, Reason, SpeedrunBundle,
    Verdict, SIGNATURE_BITS,
};
use framestamp::demo;
use framestamp::game::{Game, InputLog, Keymask, Level};
use framestamp::oracle::{Server, ThinClient};
use framestamp::raster::{pixel_diff, render};
use framestamp::secgame::{estimate_win_rate, Adversary, Setting};

const COMPLETENESS_LOGS: u64 = 100;
const COMPLETENESS_BUDGET: Duration = Duration::from_secs(60);
const TAMPER_FLIPS: usize = 1000;
const SPLICE_TRIALS: u64 = 1000;
const SPLICE_UPPER_BOUND: f64 = 0.004;
const IMMUNITY_TRIALS: u64 = 100;
const DRIFT_REJECT_WITHIN: u32 = 300;
const EXTRACT_TRIALS: u64 = 100;
/// Target frame for the security games.
const GAME_FRAME: u32 = 60;
/// SHA-256 of the demo optimal run recorded with key seed [1; 32] at epoch 0.
const GOLDEN_BUNDLE_SHA256: &str = "98947753084fee5ef535a270e0683982fb14a43ad9fa2929d61e6bdb7797ad41";

const ALPHABET: [u8; 10] = [0, 1, 2, 4, 6, 8, 10, 14, 16, 32];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_log(seed: u64) -> InputLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(20..=400);
    // Held keys: each choice lasts a few frames, as a player would hold it.
    let mut masks = Vec::with_capacity(len);
    while masks.len() < len {
        let k = Keymask::new(ALPHABET[rng.gen_range(0..ALPHABET.len())]).unwrap();
        let hold = rng.gen_range(1..=24);
        masks.extend(std::iter::repeat(k).take(hold));
    }
    masks.truncate(len);
    InputLog::dense(masks)
}

fn completeness(level: &Level) -> Outcome {
    let keys = KeyPair::from_seed(&[11; 32]);
    let pk = keys.public_key();
    let start = Instant::now();
    let results: Vec<(Verdict, usize)> = (0..COMPLETENESS_LOGS)
        .into_par_iter()
        .map(|seed| {
            let b = record(level, &random_log(seed), &keys, seed * 1_000);
            (verify_bundle(&pk, level, &b), b.frames.len())
        })
        .collect();
    let elapsed = start.elapsed();
    let accepted = results.iter().filter(|(v, _)| v.accept()).count();
    let frames: usize = results.iter().map(|(_, n)| n).sum();
    outcome(
        accepted as u64 == COMPLETENESS_LOGS && elapsed < COMPLETENESS_BUDGET,
        format!(
            "accepted {accepted}/{COMPLETENESS_LOGS} logs ({frames} frames) in {:.1}s (budget {}s)",
            elapsed.as_secs_f64(),
            COMPLETENESS_BUDGET.as_secs()
        ),
    )
}

fn overhead(level: &Level) -> Outcome {
    let keys = KeyPair::from_seed(&[12; 32]);
    let log = demo::optimal_log();
    let b = record(level, &log, &keys, 0);
    let states = Game::new(level).run(&log);
    let expected_count = signature_pixels(SIGNATURE_BITS as usize);
    let expected: Vec<usize> = (0..expected_count).collect();
    let mut bad = 0;
    for (i, f) in b.frames.iter().enumerate() {
        if pixel_diff(&render(&states[i + 1], level), &f.screenshot).unwrap() != expected {
            bad += 1;
        }
    }
    outcome(
        bad == 0 && expected_count == 16,
        format!(
            "{} frames: f vs f' differ in exactly pixels 0..{expected_count} on {}/{} frames",
            b.frames.len(),
            b.frames.len() - bad,
            b.frames.len()
        ),
    )
}

/// Verdict an honest bundle must get after flipping a bit of byte `pos`.
fn expected_tamper_verdict(bundle: &SpeedrunBundle, pos: usize) -> Verdict {
    let layout = bundle.layout();
    if pos < layout.header_len {
        let digest = 6..38;
        return if digest.contains(&pos) {
            Verdict::reject(Reason::LevelMismatch, None)
        } else {
            Verdict::reject(Reason::MalformedBundle, None)
        };
    }
    let (i, f) = layout
        .frames
        .iter()
        .enumerate()
        .find(|(_, f)| pos >= f.start && pos < f.end)
        .expect("position inside some frame");
    let rel = pos - f.start;
    let frame = Some(i as u32);
    match rel {
        // t_s of frame 0 must equal the header's t_s0.
        4..=11 if i == 0 => Verdict::reject(Reason::MalformedBundle, None),
        0..=12 => Verdict::reject(Reason::BadSignature, frame),
        13..=16 => Verdict::reject(Reason::MalformedBundle, None),
        _ if pos < f.pixels => Verdict::reject(Reason::BadSignature, frame),
        _ => Verdict::reject(Reason::RenderMismatch, frame),
    }
}

fn same_class(got: Verdict, want: Verdict) -> bool {
    // A corrupted state length can fail decoding or the per-frame length
    // check; both are malformed bundles, with or without a frame number.
    if want.reason == Reason::MalformedBundle {
        return got.reason == Reason::MalformedBundle;
    }
    got == want
}

fn tamper(level: &Level) -> Outcome {
    let keys = KeyPair::from_seed(&[13; 32]);
    let pk = keys.public_key();
    let bundles: Vec<SpeedrunBundle> = (0..5)
        .map(|s| record_frames(level, &random_log(1_000 + s), &keys, 77 * s, 8))
        .collect();
    let encoded: Vec<Vec<u8>> = bundles.iter().map(SpeedrunBundle::encode).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut flips = Vec::with_capacity(TAMPER_FLIPS);
    for n in 0..TAMPER_FLIPS {
        let which = rng.gen_range(0..bundles.len());
        let layout = bundles[which].layout();
        let pos = if n % 2 == 0 {
            // Pixel region of a random frame.
            let f = layout.frames[rng.gen_range(0..layout.frames.len())];
            rng.gen_range(f.pixels..f.end)
        } else {
            // Header or any non-pixel field of a random frame.
            let meta: usize = layout.header_len + layout.frames.iter().map(|f| f.pixels - f.start).sum::<usize>();
            let mut k = rng.gen_range(0..meta);
            if k < layout.header_len {
                k
            } else {
                k -= layout.header_len;
                let mut found = 0;
                for f in &layout.frames {
                    let len = f.pixels - f.start;
                    if k < len {
                        found = f.start + k;
                        break;
                    }
                    k -= len;
                }
                found
            }
        };
        flips.push((which, pos, rng.gen_range(0..8u8)));
    }
    let results: Vec<(bool, bool)> = flips
        .par_iter()
        .map(|&(which, pos, bit)| {
            let mut bytes = encoded[which].clone();
            bytes[pos] ^= 1 << bit;
            let got = verify_bytes(&pk, level, &bytes);
            let want = expected_tamper_verdict(&bundles[which], pos);
            (!got.accept(), same_class(got, want))
        })
        .collect();
    let rejected = results.iter().filter(|r| r.0).count();
    let classified = results.iter().filter(|r| r.1).count();
    outcome(
        rejected == TAMPER_FLIPS && classified == TAMPER_FLIPS,
        format!("rejected {rejected}/{TAMPER_FLIPS}, expected reason {classified}/{TAMPER_FLIPS} (half pixels, half fields)"),
    )
}

fn splicing(level: &Arc<Level>) -> Outcome {
    let adv = Adversary::by_name(Setting::Thin, "splice", demo::optimal_log()).unwrap();
    let r = estimate_win_rate(&adv, level, GAME_FRAME, SPLICE_TRIALS, 0).unwrap();
    outcome(
        r.wins == 0 && r.upper95 <= SPLICE_UPPER_BOUND,
        format!(
            "thin splice wins {}/{} upper95={:.6} (bound {SPLICE_UPPER_BOUND}) reasons={:?}",
            r.wins, r.trials, r.upper95, r.reasons
        ),
    )
}

fn thin_immunity(level: &Arc<Level>) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for name in ["patch", "skew"] {
        let adv = Adversary::by_name(Setting::Thin, name, demo::optimal_log()).unwrap();
        let r = estimate_win_rate(&adv, level, GAME_FRAME, IMMUNITY_TRIALS, 0).unwrap();
        pass &= r.wins == 0;
        parts.push(format!("{name} {}/{}", r.wins, r.trials));
    }
    let keys = KeyPair::from_seed(&[14; 32]);
    let pk = keys.public_key();
    let log = demo::optimal_log();
    let v2 = verify_bundle(&pk, level, &skew_run(level, &log, SkewFactor::new(2, 1).unwrap(), &keys, 0));
    let v105 = verify_bundle(&pk, level, &skew_run(level, &log, SkewFactor::new(21, 20).unwrap(), &keys, 0));
    pass &= v2 == Verdict::reject(Reason::TimingViolation, Some(1));
    pass &= v105.reason == Reason::TimingViolation && v105.frame.is_some_and(|f| f <= DRIFT_REJECT_WITHIN);
    parts.push(format!("factor 2: {v2}"));
    parts.push(format!("factor 1.05: {v105} (limit {DRIFT_REJECT_WITHIN})"));
    outcome(pass, parts.join("; "))
}

fn completion(level: &Level, log: &InputLog) -> Option<usize> {
    Game::new(level).run(log).iter().position(|s| s.complete)
}

fn record_via_server(addr: SocketAddr, log: &InputLog) -> Vec<u8> {
    let mut client = ThinClient::connect(addr, demo::LEVEL_ID).unwrap();
    client.play(log, log.frames()).unwrap();
    client.end().unwrap().1
}

fn simulated_input(level: &Arc<Level>) -> Outcome {
    let keys = Arc::new(KeyPair::from_seed(&[15; 32]));
    let server = Server::new(level.clone(), demo::LEVEL_ID, keys.clone())
        .bind("127.0.0.1:0")
        .unwrap();
    let misstep = demo::misstep_log();
    let edited = edit_input_log(&misstep, &demo::misstep_edits().edits).unwrap();
    let optimal = demo::optimal_log();

    let pk = keys.public_key();
    let v_edited = verify_bytes(&pk, level, &record_via_server(server.local_addr(), &edited));
    let v_optimal = verify_bytes(&pk, level, &record_via_server(server.local_addr(), &optimal));
    server.shutdown();

    let (c_miss, c_edit) = (completion(level, &misstep), completion(level, &edited));
    let faster = matches!((c_miss, c_edit), (Some(m), Some(e)) if e < m);
    let s_edit = interarrival_stats(&edited);
    let s_opt = interarrival_stats(&optimal);
    let stats_ok = [s_edit, s_opt]
        .iter()
        .all(|s| s.mean.is_finite() && s.variance >= 0.0 && (0.0..=6.0).contains(&s.entropy_bits));
    outcome(
        v_edited.accept() && v_optimal.accept() && faster && stats_ok,
        format!(
            "edited log {v_edited}, second honest log {v_optimal}; completes at {c_edit:?} vs misstep {c_miss:?}; \
             edited mean={:.3} var={:.3} H={:.3}b; honest mean={:.3} var={:.3} H={:.3}b",
            s_edit.mean, s_edit.variance, s_edit.entropy_bits, s_opt.mean, s_opt.variance, s_opt.entropy_bits
        ),
    )
}

fn thick_break(level: &Arc<Level>) -> Outcome {
    let adv = Adversary::by_name(Setting::Thick, "extract", demo::optimal_log()).unwrap();
    let r = estimate_win_rate(&adv, level, GAME_FRAME, EXTRACT_TRIALS, 0).unwrap();
    outcome(
        r.wins == EXTRACT_TRIALS,
        format!("thick extract wins {}/{} reasons={:?}", r.wins, r.trials, r.reasons),
    )
}

fn determinism(level: &Level) -> Outcome {
    let keys = KeyPair::from_seed(&[1; 32]);
    let log = demo::optimal_log();
    let a = hex::encode(Sha256::digest(record(level, &log, &keys, 0).encode()));
    let b = hex::encode(Sha256::digest(record(level, &log, &keys, 0).encode()));
    outcome(
        a == b && a == GOLDEN_BUNDLE_SHA256,
        format!("run hashes equal: {}; sha256={a} golden={GOLDEN_BUNDLE_SHA256} (one platform)", a == b),
    )
}

fn main() {
    let level = Arc::new(demo::level());
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("completeness", Box::new({ let l = level.clone(); move || completeness(&l) })),
        ("signature-pixel overhead", Box::new({ let l = level.clone(); move || overhead(&l) })),
        ("tamper sensitivity", Box::new({ let l = level.clone(); move || tamper(&l) })),
        ("splicing mitigation", Box::new({ let l = level.clone(); move || splicing(&l) })),
        ("thin-client immunity", Box::new({ let l = level.clone(); move || thin_immunity(&l) })),
        ("simulated-input limitation", Box::new({ let l = level.clone(); move || simulated_input(&l) })),
        ("thick-client break", Box::new({ let l = level.clone(); move || thick_break(&l) })),
        ("determinism", Box::new({ let l = level.clone(); move || determinism(&l) })),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
