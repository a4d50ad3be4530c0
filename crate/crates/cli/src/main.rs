//! `framestamp`: keys, oracle server, recording, verification, attacks and
//! security-game runs.
//!
//! Every subcommand prints one machine-readable summary line on stdout.
//! Human-oriented detail goes to stderr with `--verbose`.

use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::RngCore;
use sha2::{Digest, Sha256};

use framestamp::adversary::{
    edit_input_log, interarrival_stats, patched_game, skew_run, splice, ConstantsOverride, EditScript,
    InputStats, SkewFactor,
};
use framestamp::authstamp::{record_frames, verify_bytes, KeyPair, PublicKey, Recorder, SpeedrunBundle};
use framestamp::demo;
use framestamp::game::{Game, InputLog, Level};
use framestamp::oracle::{Server, ThinClient};
use framestamp::secgame::{estimate_win_rate, Adversary, Setting};

#[derive(Parser)]
#[command(name = "framestamp", version, about = "Signed-frame speedrun recording and verification")]
struct Cli {
    /// Print human-readable detail on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signing key: hex secret at OUT, hex public key at OUT.pub.
    Keygen {
        #[arg(long)]
        out: PathBuf,
        /// 32-byte hex seed; random when absent.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Run the thin-client oracle server.
    Serve {
        #[command(flatten)]
        level: LevelArg,
        #[arg(long)]
        key: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        /// Fixed run start in ms instead of the system clock.
        #[arg(long)]
        epoch: Option<u64>,
    },
    /// Record an input log into a bundle, locally or through a server.
    Record {
        #[command(flatten)]
        level: LevelArg,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Signing key for local (thick-client) recording.
        #[arg(long, required_unless_present = "connect", conflicts_with = "connect")]
        key: Option<PathBuf>,
        /// Server address for thin-client recording.
        #[arg(long)]
        connect: Option<String>,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
        /// Frames to play; defaults to the length of the log.
        #[arg(long)]
        frames: Option<u32>,
    },
    /// Verify a bundle. Exit status 0 on ACCEPT, 1 on REJECT, 2 on error.
    Verify {
        #[command(flatten)]
        level: LevelArg,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        pubkey: PathBuf,
    },
    /// Produce fraudulent artifacts.
    Attack {
        #[command(subcommand)]
        attack: Attack,
    },
    /// Estimate an adversary's win rate in a security game.
    Secgame {
        #[command(subcommand)]
        game: SecgameCommand,
    },
    /// Interarrival and entropy statistics of input logs.
    Metrics {
        #[arg(long, required = true)]
        inputs: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Attack {
    /// Concatenate frame ranges of several bundles.
    Splice {
        /// Input bundles, in order.
        #[arg(long, required = true)]
        bundle: Vec<PathBuf>,
        /// One half-open range START..END per bundle.
        #[arg(long, required = true, value_parser = parse_range)]
        cut: Vec<Range<u32>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply an edit script to an input log.
    ReplayEdit {
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        edits: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Level used to report completion frames of both logs.
        #[command(flatten)]
        level: LevelArg,
    },
    /// Record through a game with patched physics constants.
    Patch {
        #[command(flatten)]
        level: LevelArg,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// NAME=VALUE, repeatable.
        #[arg(long = "set", required = true)]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
    },
    /// Record with a slowed game clock.
    Skew {
        #[command(flatten)]
        level: LevelArg,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        key: PathBuf,
        /// Slow-down factor, e.g. 2, 1.05 or 21/20.
        #[arg(long)]
        factor: SkewFactor,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        epoch: u64,
    },
}

#[derive(Subcommand)]
enum SecgameCommand {
    Thin(SecgameArgs),
    Thick(SecgameArgs),
}

#[derive(Args)]
struct SecgameArgs {
    /// Strategy name (thin: honest, forger, splice, patch, skew; thick:
    /// honest, extract, patch, skew).
    #[arg(long)]
    adversary: String,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target frame t.
    #[arg(long, default_value_t = 60)]
    frames: u32,
    #[command(flatten)]
    level: LevelArg,
    /// Input log the strategies build on; the bundled demo run by default.
    #[arg(long)]
    inputs: Option<PathBuf>,
    /// Write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LevelArg {
    /// Level file; the bundled demo level when absent.
    #[arg(long)]
    level: Option<PathBuf>,
    /// Level id used on the wire; defaults to the level file's stem.
    #[arg(long)]
    level_id: Option<String>,
}

impl LevelArg {
    fn load(&self) -> Result<Level> {
        match &self.level {
            None => Ok(demo::level()),
            Some(path) => {
                let text = read_text(path)?;
                Level::parse(&text).with_context(|| format!("parsing level {}", path.display()))
            }
        }
    }

    fn id(&self) -> String {
        if let Some(id) = &self.level_id {
            return id.clone();
        }
        match &self.level {
            None => demo::LEVEL_ID.to_owned(),
            Some(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| demo::LEVEL_ID.to_owned()),
        }
    }
}

fn parse_range(s: &str) -> Result<Range<u32>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let start = a.trim().parse().map_err(|_| format!("bad range start in {s:?}"))?;
    let end = b.trim().parse().map_err(|_| format!("bad range end in {s:?}"))?;
    Ok(start..end)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_log(path: &Path) -> Result<InputLog> {
    InputLog::from_json(&read_text(path)?).with_context(|| format!("parsing input log {}", path.display()))
}

fn read_hex32(path: &Path) -> Result<[u8; 32]> {
    let text = read_text(path)?;
    let bytes = hex::decode(text.trim()).with_context(|| format!("{} is not hex", path.display()))?;
    bytes
        .try_into()
        .map_err(|b: Vec<u8>| anyhow::anyhow!("{} holds {} bytes, expected 32", path.display(), b.len()))
}

fn read_keys(path: &Path) -> Result<KeyPair> {
    Ok(KeyPair::from_seed(&read_hex32(path)?))
}

fn read_pubkey(path: &Path) -> Result<PublicKey> {
    PublicKey::from_bytes(&read_hex32(path)?).with_context(|| format!("loading {}", path.display()))
}

fn read_bundle(path: &Path) -> Result<SpeedrunBundle> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    SpeedrunBundle::decode(&bytes).with_context(|| format!("decoding {}", path.display()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_bundle(path: &Path, bundle: &SpeedrunBundle) -> Result<String> {
    let bytes = bundle.encode();
    write_file(path, &bytes)?;
    Ok(format!(
        "frames={} bytes={} sha256={} out={}",
        bundle.frames.len(),
        bytes.len(),
        sha256_hex(&bytes),
        path.display()
    ))
}

fn stats_line(label: &str, s: &InputStats) -> String {
    format!(
        "metrics log={label} count={} mean={:.4} variance={:.4} min={} max={} entropy_bits={:.4}",
        s.count, s.mean, s.variance, s.min, s.max, s.entropy_bits
    )
}

/// First frame at which `log` completes the level, if it does.
fn completion_frame(level: &Level, log: &InputLog) -> Option<usize> {
    Game::new(level).run(log).iter().position(|s| s.complete)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Keygen { out, seed } => {
            let seed = match seed {
                Some(hex_seed) => {
                    let bytes = hex::decode(hex_seed.trim()).context("seed is not hex")?;
                    <[u8; 32]>::try_from(bytes.as_slice()).context("seed must be 32 bytes")?
                }
                None => {
                    let mut s = [0u8; 32];
                    rand::rngs::OsRng.fill_bytes(&mut s);
                    s
                }
            };
            let keys = KeyPair::from_seed(&seed);
            let pk = hex::encode(keys.public_key().to_bytes());
            write_file(&out, format!("{}\n", hex::encode(seed)).as_bytes())?;
            let pub_path = pub_path(&out);
            write_file(&pub_path, format!("{pk}\n").as_bytes())?;
            println!("keygen pk={pk} secret={} public={}", out.display(), pub_path.display());
        }
        Command::Serve {
            level,
            key,
            listen,
            epoch,
        } => {
            let lvl = Arc::new(level.load()?);
            let keys = Arc::new(read_keys(&key)?);
            let pk = hex::encode(keys.public_key().to_bytes());
            let mut server = Server::new(lvl, level.id(), keys);
            if let Some(e) = epoch {
                server = server.with_epoch(e);
            }
            let handle = server.bind(&listen).with_context(|| format!("binding {listen}"))?;
            println!("serving addr={} level={} pk={pk}", handle.local_addr(), level.id());
            std::io::stdout().flush()?;
            handle.wait();
        }
        Command::Record {
            level,
            inputs,
            out,
            key,
            connect,
            epoch,
            frames,
        } => {
            let log = read_log(&inputs)?;
            let frames = frames.unwrap_or(log.frames());
            let (bundle, mode) = match (key, connect) {
                (Some(key), None) => {
                    let lvl = level.load()?;
                    let keys = read_keys(&key)?;
                    (record_frames(&lvl, &log, &keys, epoch, frames), "local")
                }
                (None, Some(addr)) => {
                    let mut client = ThinClient::connect(&addr, &level.id())
                        .with_context(|| format!("connecting to {addr}"))?;
                    client.play(&log, frames)?;
                    let (bundle, _) = client.end()?;
                    (bundle, "thin")
                }
                _ => bail!("exactly one of --key and --connect is required"),
            };
            println!("recorded mode={mode} {}", write_bundle(&out, &bundle)?);
        }
        Command::Verify { level, bundle, pubkey } => {
            let lvl = level.load()?;
            let pk = read_pubkey(&pubkey)?;
            let bytes = fs::read(&bundle).with_context(|| format!("reading {}", bundle.display()))?;
            let verdict = verify_bytes(&pk, &lvl, &bytes);
            println!("{verdict}");
            if verbose {
                eprintln!("bundle {} ({} bytes)", bundle.display(), bytes.len());
            }
            return Ok(if verdict.accept() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Attack { attack } => run_attack(attack, verbose)?,
        Command::Secgame { game } => {
            let (setting, args) = match game {
                SecgameCommand::Thin(a) => (Setting::Thin, a),
                SecgameCommand::Thick(a) => (Setting::Thick, a),
            };
            if args.frames == 0 {
                bail!("--frames must be at least 1");
            }
            if args.trials == 0 {
                bail!("--trials must be at least 1");
            }
            let level = Arc::new(args.level.load()?);
            let log = match &args.inputs {
                Some(p) => read_log(p)?,
                None => demo::optimal_log(),
            };
            let names = match setting {
                Setting::Thin => &Adversary::THIN_NAMES[..],
                Setting::Thick => &Adversary::THICK_NAMES[..],
            };
            let adversary = Adversary::by_name(setting, &args.adversary, log).with_context(|| {
                format!("unknown adversary {:?}, expected one of {}", args.adversary, names.join(", "))
            })?;
            let report = estimate_win_rate(&adversary, &level, args.frames, args.trials, args.seed)?;
            let reasons: Vec<String> = report.reasons.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            println!(
                "secgame game={} strategy={} trials={} wins={} rate={} upper95={:.6} reasons={}",
                match setting {
                    Setting::Thin => "thin",
                    Setting::Thick => "thick",
                },
                report.strategy,
                report.trials,
                report.wins,
                report.rate,
                report.upper95,
                reasons.join(",")
            );
            if let Some(out) = &args.out {
                write_file(out, serde_json::to_string_pretty(&report)?.as_bytes())?;
            }
        }
        Command::Metrics { inputs } => {
            for path in inputs {
                let log = read_log(&path)?;
                println!("{}", stats_line(&path.display().to_string(), &interarrival_stats(&log)));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn pub_path(secret: &Path) -> PathBuf {
    let mut name = secret.as_os_str().to_owned();
    name.push(".pub");
    PathBuf::from(name)
}

fn run_attack(attack: Attack, verbose: bool) -> Result<()> {
    match attack {
        Attack::Splice { bundle, cut, out } => {
            let bundles = bundle.iter().map(|p| read_bundle(p)).collect::<Result<Vec<_>>>()?;
            let spliced = splice(&bundles, &cut)?;
            println!("splice {}", write_bundle(&out, &spliced)?);
        }
        Attack::ReplayEdit {
            inputs,
            edits,
            out,
            level,
        } => {
            let log = read_log(&inputs)?;
            let script = EditScript::from_json(&read_text(&edits)?)?;
            let edited = edit_input_log(&log, &script.edits)?;
            write_file(&out, edited.to_json().as_bytes())?;
            let lvl = level.load()?;
            let show = |f: Option<usize>| f.map_or("none".to_owned(), |f| f.to_string());
            println!(
                "replay-edit entries={} edited_entries={} complete_at={} edited_complete_at={} out={}",
                log.len(),
                edited.len(),
                show(completion_frame(&lvl, &log)),
                show(completion_frame(&lvl, &edited)),
                out.display()
            );
            if verbose {
                eprintln!("{}", stats_line("original", &interarrival_stats(&log)));
                eprintln!("{}", stats_line("edited", &interarrival_stats(&edited)));
            }
        }
        Attack::Patch {
            level,
            inputs,
            key,
            set,
            out,
            epoch,
        } => {
            let lvl = level.load()?;
            let log = read_log(&inputs)?;
            let keys = read_keys(&key)?;
            let mut patch = ConstantsOverride::new();
            for s in &set {
                patch.set_assignment(s)?;
            }
            let game = patched_game(&lvl, &patch)?;
            let mut rec = Recorder::with_game(game, &keys, epoch);
            for t in 0..log.frames() {
                if rec.state().complete {
                    break;
                }
                rec.push(log.mask_at(t));
            }
            println!("patch {}", write_bundle(&out, &rec.finish())?);
        }
        Attack::Skew {
            level,
            inputs,
            key,
            factor,
            out,
            epoch,
        } => {
            let lvl = level.load()?;
            let log = read_log(&inputs)?;
            let keys = read_keys(&key)?;
            let bundle = skew_run(&lvl, &log, factor, &keys, epoch);
            println!("skew factor={factor} {}", write_bundle(&out, &bundle)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..9"), Ok(3..9));
        assert!(parse_range("3-9").is_err());
        assert!(parse_range("a..9").is_err());
    }

    #[test]
    fn pub_path_appends() {
        assert_eq!(pub_path(Path::new("/tmp/k")), PathBuf::from("/tmp/k.pub"));
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn demo_completes_on_last_frame() {
        let log = demo::optimal_log();
        assert_eq!(completion_frame(&demo::level(), &log), Some(log.frames() as usize));
    }
}
