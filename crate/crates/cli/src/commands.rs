use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use gqads_core::adversary::{run_campaign_with_progress, AttackSpec, CampaignResult};
use gqads_core::analysis::figures::{figure_data, FigureGrid, FigureId};
use gqads_core::analysis::{
    gamma_star, log2_rational, min_key_for_targets, n_opt_asym, n_opt_with_rule, security_bits, BetaRule,
    SecurityFigures, Table,
};
use gqads_core::analysis::optimize::{divisors, meets_targets};
use gqads_core::protocol::{
    decode_signed_message, deliver, distribute, distribute_with_keys, encode_signed_message, sign, Decision,
};
use gqads_core::{Outcome, QkdKey, ValidatedParams};

use crate::args::{AttackArgs, AttackKind, KeygenArgs, OptimizeArgs, OutputArgs, RunArgs, Tamper};
use crate::output::{config_line, exact, float, int, ratio, render, table, text};

/// What a finished command hands back to `main`.
pub struct Report {
    pub stdout: String,
    /// Written instead of `stdout` when set.
    pub out_file: Option<std::path::PathBuf>,
    pub exit_code: i32,
}

fn param_flags(p: &ValidatedParams) -> Vec<String> {
    let q = p.params();
    vec![
        "--mode".into(),
        q.mode.to_string(),
        "--n".into(),
        q.n.to_string(),
        "--r".into(),
        q.r.to_string(),
        "--S".into(),
        q.shared.to_string(),
        "--vb".into(),
        q.v_b.to_string(),
        "--vc".into(),
        q.v_c.to_string(),
        "--suite".into(),
        q.scheme.suite(q.r),
    ]
}

fn output_flags(o: &OutputArgs) -> Vec<String> {
    let mut v = vec!["--format".to_string(), o.format.token().to_string()];
    if o.exact {
        v.push("--exact".into());
    }
    v
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn finish(args: Vec<String>, output: &OutputArgs, tables: &[Table], exit_code: i32) -> Report {
    let mut stdout = config_line(output.format, &args);
    stdout.push_str(&render(output.format, output.exact, tables));
    Report {
        stdout,
        out_file: None,
        exit_code,
    }
}

fn key_label(i: u8) -> String {
    format!("qkd/k{i}")
}

pub fn keygen(a: &KeygenArgs) -> Result<Report> {
    let seed = a.seed.resolve();
    if a.n == 0 || a.r == 0 {
        return Err(gqads_core::Error::InvalidParams(format!("n and r must be positive (n = {}, r = {})", a.n, a.r)).into());
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut rows = Vec::new();
    for i in [1u8, 2] {
        // same derivation as the protocol's own distribution phase
        let key = QkdKey::generate(&seed.derive(&key_label(i)), a.n, a.r);
        let path = a.out.join(format!("k{i}.key"));
        let bytes = if a.hex {
            key.to_hex_text().into_bytes()
        } else {
            key.to_file_bytes()
        };
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        rows.push(vec![
            text(format!("k{i}")),
            text(path_str(&path)),
            int(a.n),
            int(a.r),
            int(u64::from(a.n) * u64::from(a.r)),
        ]);
    }
    let mut args = vec![
        "keygen".into(),
        "--n".into(),
        a.n.to_string(),
        "--r".into(),
        a.r.to_string(),
        "--seed".into(),
        seed.to_hex(),
        "--out".into(),
        path_str(&a.out),
    ];
    if a.hex {
        args.push("--hex".into());
    }
    args.extend(output_flags(&a.output));
    Ok(finish(args, &a.output, &[table(&["key", "path", "n", "r", "bits"], rows)], 0))
}

fn read_key(path: &Path) -> Result<QkdKey> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    QkdKey::from_file_bytes(&data).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(a: &RunArgs) -> Result<Report> {
    let seed = a.seed.resolve();
    let (params, mut sm, message_flags) = match &a.input_signed {
        Some(path) => {
            let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            let (params, sm) = decode_signed_message(&data)?;
            (params, Some(sm), vec!["--input-signed".to_string(), path_str(path)])
        }
        None => {
            let params = a.params.resolve(8, 64).validate()?;
            let flags = match (&a.message, &a.text) {
                (Some(p), _) => vec!["--message".to_string(), path_str(p)],
                (None, t) => vec!["--text".to_string(), t.clone().unwrap_or_else(|| "hello".into())],
            };
            (params, None, flags)
        }
    };
    let (alice, bob, charlie) = match (&a.k1, &a.k2) {
        (Some(p1), Some(p2)) => distribute_with_keys(&seed, &params, read_key(p1)?, read_key(p2)?)?,
        _ => distribute(&seed, &params)?,
    };
    let mut sm = match sm.take() {
        Some(sm) => sm,
        None => {
            let message = match (&a.message, &a.text) {
                (Some(p), _) => fs::read(p).with_context(|| format!("reading {}", p.display()))?,
                (None, t) => t.as_deref().unwrap_or("hello").as_bytes().to_vec(),
            };
            let sm = sign(&alice, &message)?;
            if let Some(out) = &a.out {
                fs::write(out, encode_signed_message(&params, &sm))
                    .with_context(|| format!("writing {}", out.display()))?;
            }
            sm
        }
    };
    match a.tamper {
        Tamper::None => {}
        Tamper::FlipBit if !sm.message.is_empty() => sm.message[0] ^= 1,
        Tamper::FlipBit | Tamper::FlipTag => sm.signature.tags[0].flip(0),
    }
    let t = deliver(&sm, &bob, (!a.charlie_offline).then_some(&charlie))?;

    let deterministic = params.mode().is_deterministic();
    let bob_note = match (deterministic, t.bob.outcome) {
        (true, Outcome::Accept) => "contingent on Charlie",
        _ => "",
    };
    let charlie_note = match (&t.charlie, a.charlie_offline) {
        (None, true) => "offline",
        (None, false) => "not forwarded",
        _ => "",
    };
    let mut rows = vec![vec![
        text("bob"),
        int(t.bob.checkable.len() as u64),
        int(t.bob.match_count),
        int(t.bob.threshold),
        text(t.bob.outcome.to_string()),
        text(t.bob_decision.to_string()),
        text(bob_note),
    ]];
    rows.push(match &t.charlie {
        Some(c) => vec![
            text("charlie"),
            int(c.checkable.len() as u64),
            int(c.match_count),
            int(c.threshold),
            text(c.outcome.to_string()),
            text(t.charlie_decision.to_string()),
            text(charlie_note),
        ],
        None => vec![
            text("charlie"),
            int(charlie.checkable().len() as u64),
            text("-"),
            int(params.v_c()),
            text("-"),
            text(t.charlie_decision.to_string()),
            text(charlie_note),
        ],
    });
    let parties = table(&["party", "checkable", "matches", "threshold", "local", "decision", "note"], rows);
    let accounting = table(
        &["mode", "n", "r", "S", "V_B", "V_C", "suite", "tags", "tag_bits", "signature_bits", "key_bits", "fingerprint"],
        vec![vec![
            text(params.mode().token()),
            int(params.n()),
            int(params.r()),
            int(params.shared()),
            int(params.v_b()),
            int(params.v_c()),
            text(params.suite()),
            int(sm.signature.tags.len() as u64),
            int(params.tag_len()),
            int(sm.signature.bit_len()),
            int(params.key_bits()),
            text(params.fingerprint_hex()),
        ]],
    );
    let rejected = t.bob_decision == Decision::Reject || t.charlie_decision == Decision::Reject;

    let mut args = vec!["run".to_string()];
    if a.input_signed.is_none() {
        args.extend(param_flags(&params));
    }
    args.extend(["--seed".to_string(), seed.to_hex()]);
    if let (Some(p1), Some(p2)) = (&a.k1, &a.k2) {
        args.extend(["--k1".into(), path_str(p1), "--k2".into(), path_str(p2)]);
    }
    args.extend(message_flags);
    if a.tamper != Tamper::None {
        let token = if a.tamper == Tamper::FlipBit { "flip-bit" } else { "flip-tag" };
        args.extend(["--tamper".into(), token.into()]);
    }
    if a.charlie_offline {
        args.push("--charlie-offline".into());
    }
    if let Some(out) = &a.out {
        if a.input_signed.is_none() {
            args.extend(["--out".into(), path_str(out)]);
        }
    }
    args.extend(output_flags(&a.output));
    Ok(finish(args, &a.output, &[parties, accounting], if rejected { 2 } else { 0 }))
}

fn attack_params(a: &AttackArgs) -> Result<(ValidatedParams, AttackSpec)> {
    Ok(match a.attack {
        AttackKind::Repudiation => {
            let p = a.params.resolve(8, 256).validate()?;
            if a.errors == Some(0) {
                return Err(gqads_core::Error::EEqualsZero.into());
            }
            (p.clone(), AttackSpec::repudiation(p, a.errors))
        }
        AttackKind::ForgeryToy => {
            if a.errors.is_some() {
                bail!(gqads_core::Error::InvalidParams("--errors only applies to repudiation".into()));
            }
            let mut raw = a.params.resolve(8, 8);
            raw.scheme = gqads_core::TagScheme::Toy;
            let p = raw.validate()?;
            let spec = AttackSpec::forgery(&p, p.r())?;
            (spec.params().clone(), spec)
        }
    })
}

/// Splits the trial range across threads. Trial i always runs on the seed
/// derived for index i, so the totals do not depend on the thread count.
fn parallel_campaign(
    spec: &AttackSpec,
    trials: u64,
    seed: &gqads_core::Seed,
    progress: &mut dyn FnMut(u64, u64),
) -> Result<CampaignResult> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get() as u64).min(trials);
    if workers <= 1 {
        return Ok(run_campaign_with_progress(spec, trials, seed, progress)?);
    }
    let done = AtomicU64::new(0);
    let mut total = CampaignResult {
        attack: spec.name().to_string(),
        trials,
        successes: 0,
        cost_sum: 0,
        cost_sq_sum: 0,
        resamples: 0,
        params_fingerprint: spec.params().fingerprint_hex(),
    };
    std::thread::scope(|scope| -> Result<()> {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (start, end) = (trials * w / workers, trials * (w + 1) / workers);
                let done = &done;
                scope.spawn(move || -> gqads_core::Result<CampaignResult> {
                    let mut acc = CampaignResult {
                        attack: String::new(),
                        trials: 0,
                        successes: 0,
                        cost_sum: 0,
                        cost_sq_sum: 0,
                        resamples: 0,
                        params_fingerprint: String::new(),
                    };
                    for i in start..end {
                        let o = spec.run_trial(&gqads_core::derive_trial_seed(seed, i))?;
                        acc.successes += u64::from(o.success);
                        acc.cost_sum += u128::from(o.cost);
                        acc.cost_sq_sum += u128::from(o.cost) * u128::from(o.cost);
                        acc.resamples += o.resamples;
                        done.fetch_add(1, Ordering::Relaxed);
                    }
                    Ok(acc)
                })
            })
            .collect();
        let step = (trials / 100).max(1);
        let mut reported = 0;
        while handles.iter().any(|h| !h.is_finished()) {
            std::thread::sleep(Duration::from_millis(100));
            let d = done.load(Ordering::Relaxed);
            if d / step > reported / step && d < trials {
                progress(d, trials);
                reported = d;
            }
        }
        for h in handles {
            let part = h.join().expect("campaign worker panicked")?;
            total.successes += part.successes;
            total.cost_sum += part.cost_sum;
            total.cost_sq_sum += part.cost_sq_sum;
            total.resamples += part.resamples;
        }
        progress(trials, trials);
        Ok(())
    })?;
    Ok(total)
}

pub fn attack(a: &AttackArgs, progress: &mut dyn FnMut(u64, u64)) -> Result<Report> {
    let seed = a.seed.resolve();
    let (params, spec) = attack_params(a)?;
    let res = parallel_campaign(&spec, a.trials, &seed, progress)?;
    let errors = spec.errors().map_or(text(""), int);
    let (exact_rate, rate_z) = match spec.expected_rate()? {
        Some(p) => (exact(&p), float(res.rate_z(&p))),
        None => (text(""), text("")),
    };
    let (cost_exp, cost_z) = match spec.expected_cost()? {
        Some(c) => (exact(&c), float(res.cost_z(&c))),
        None => (text(""), text("")),
    };
    let t = table(
        &[
            "attack",
            "n",
            "S",
            "V_C",
            "r",
            "errors",
            "trials",
            "successes",
            "empirical",
            "stderr",
            "exact",
            "z",
            "mean_cost",
            "cost_stderr",
            "expected_cost",
            "cost_z",
            "resamples",
            "params_fingerprint",
        ],
        vec![vec![
            text(spec.name()),
            int(params.n()),
            int(params.shared()),
            int(params.v_c()),
            int(params.r()),
            errors,
            int(res.trials),
            int(res.successes),
            ratio(res.successes, res.trials),
            float(res.stderr()),
            exact_rate,
            rate_z,
            exact(&res.mean_cost()),
            float(res.cost_stderr()),
            cost_exp,
            cost_z,
            int(res.resamples),
            text(res.params_fingerprint.clone()),
        ]],
    );
    let kind = match a.attack {
        AttackKind::Repudiation => "repudiation",
        AttackKind::ForgeryToy => "forgery-toy",
    };
    let mut args = vec!["attack".to_string(), kind.to_string()];
    args.extend(param_flags(&params));
    if let Some(e) = a.errors {
        args.extend(["--errors".into(), e.to_string()]);
    }
    args.extend([
        "--trials".into(),
        a.trials.to_string(),
        "--seed".into(),
        seed.to_hex(),
    ]);
    if let Some(out) = &a.out {
        args.extend(["--out".into(), path_str(out)]);
    }
    args.extend(output_flags(&a.output));
    let mut report = finish(args, &a.output, &[t], 0);
    report.out_file = a.out.clone();
    Ok(report)
}

const SECURITY_HEADER: [&str; 8] = ["S", "V_C", "gamma", "P_R", "P_F", "log2PR", "log2PF", "bits"];

fn security_cells(f: &SecurityFigures) -> Vec<gqads_core::analysis::figures::Cell> {
    vec![
        int(f.shared),
        int(f.v_c),
        ratio(u64::from(f.v_c - 2 * f.shared), u64::from(f.n - f.shared)),
        exact(&f.p_rep_exact),
        exact(&f.p_forge),
        float(log2_rational(&f.p_rep_exact)),
        float(log2_rational(&f.p_forge)),
        float(security_bits(f.max_p())),
    ]
}

fn with_header(lead: &[&str]) -> Vec<String> {
    lead.iter().chain(SECURITY_HEADER.iter()).map(|s| s.to_string()).collect()
}

fn owned_table(header: Vec<String>, rows: Vec<Vec<gqads_core::analysis::figures::Cell>>) -> Table {
    Table { header, rows }
}

pub fn optimize(a: &OptimizeArgs) -> Result<Report> {
    let mut args = vec!["optimize".to_string()];
    let mut tables = Vec::new();
    if let Some(name) = &a.figure {
        let id: FigureId = name.parse()?;
        tables.push(figure_data(id, &FigureGrid::for_figure(id))?);
        args.extend(["--figure".into(), id.name().into()]);
    } else if let (Some(n), Some(r)) = (a.n, a.r) {
        let rule = a.rule.unwrap_or(BetaRule::Half);
        let g = gamma_star(n, r, rule)?;
        let c = &g.exact;
        let figures = SecurityFigures::new(n, c.shared, c.v_c, r, gqads_core::analysis::Regime::Linear)?;
        let mut row = vec![int(n), int(r), text(rule.to_string())];
        row.extend(security_cells(&figures));
        row.extend([
            int(g.approx.shared),
            int(g.approx.v_c),
            ratio(*g.approx.gamma.numer(), *g.approx.gamma.denom()),
            float(g.approx.log2_max()),
        ]);
        let mut header = with_header(&["n", "r", "rule"]);
        header.extend(["S_approx", "V_C_approx", "gamma_approx", "log2max_approx"].map(String::from));
        if let Some(t) = a.targets {
            // any (S, V_C) at this (n, r), not only the optimum
            let ok = meets_targets(n, r, t.b_r, t.b_f);
            header.push("meets_targets".into());
            row.push(text(ok.to_string()));
        }
        tables.push(owned_table(header, vec![row]));
        if a.sweep {
            // every threshold at the chosen share count
            let s = c.shared;
            let rows = (2 * s + 1..=n + s)
                .map(|v| -> Result<_> {
                    let f = SecurityFigures::new(n, s, v, r, gqads_core::analysis::Regime::Linear)?;
                    let mut row = vec![int(n), int(r)];
                    row.extend(security_cells(&f));
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            tables.push(owned_table(with_header(&["n", "r"]), rows));
        }
        args.extend(["--n".into(), n.to_string(), "--r".into(), r.to_string(), "--rule".into(), rule.to_string()]);
    } else if let Some(l) = a.key_bits {
        let rule = a.rule.unwrap_or(BetaRule::Free);
        let (opt, aux) = match a.targets {
            Some(t) => {
                if a.rule.is_some_and(|r| r != BetaRule::Free) {
                    bail!(gqads_core::Error::InvalidParams("--targets with --L searches every S; drop --rule".into()));
                }
                let asym = n_opt_asym(l, t.b_r, t.b_f)?;
                (asym.optimum.clone(), Some(asym))
            }
            None => (n_opt_with_rule(l, rule)?, None),
        };
        let mut header = with_header(&["L", "rule", "n_opt", "r_opt"]);
        header.push("beta".into());
        let mut row = vec![int(l), text(opt.rule.to_string()), int(opt.n_opt), int(opt.r_opt)];
        row.extend(security_cells(&opt.achieved));
        row.push(ratio(u64::from(opt.shared), u64::from(opt.n_opt)));
        if let Some(asym) = &aux {
            header.extend(["b_R", "b_F", "r_aux", "L_aux"].map(String::from));
            row.extend([int(asym.b_r), int(asym.b_f), int(asym.r_aux), int(asym.l_aux)]);
        }
        tables.push(owned_table(header, vec![row]));
        if a.sweep {
            let mut rows = Vec::new();
            for n in divisors(l) {
                let (n, r) = (n as u32, (l / n) as u32);
                let Ok(g) = gamma_star(n, r, rule) else { continue };
                let f = SecurityFigures::new(n, g.exact.shared, g.exact.v_c, r, gqads_core::analysis::Regime::Linear)?;
                let mut row = vec![int(n), int(r)];
                row.extend(security_cells(&f));
                rows.push(row);
            }
            tables.push(owned_table(with_header(&["n", "r"]), rows));
        }
        args.extend(["--L".into(), l.to_string(), "--rule".into(), opt.rule.to_string()]);
        if let Some(t) = a.targets {
            args.extend(["--targets".into(), t.to_string()]);
        }
    } else if let Some(t) = a.targets {
        let rep = min_key_for_targets(t.b_r, t.b_f, a.max_n)?;
        let mut header = with_header(&["b_R", "b_F", "L", "n", "r"]);
        header.extend(["bits_R", "bits_F"].map(String::from));
        let mut row = vec![int(rep.b_r), int(rep.b_f), int(rep.key_bits), int(rep.n), int(rep.r)];
        row.extend(security_cells(&rep.achieved));
        row.extend([float(rep.achieved.security_bits_rep), float(rep.achieved.security_bits_forge)]);
        tables.push(owned_table(header, vec![row]));
        args.extend(["--targets".into(), t.to_string(), "--max-n".into(), a.max_n.to_string()]);
    } else {
        bail!(UsageError("optimize needs --n and --r, --L, --targets or --figure".into()));
    }
    if a.sweep {
        args.push("--sweep".into());
    }
    if let Some(out) = &a.out {
        args.extend(["--out".into(), path_str(out)]);
    }
    args.extend(output_flags(&a.output));
    let mut report = finish(args, &a.output, &tables, 0);
    report.out_file = a.out.clone();
    Ok(report)
}

/// Argument combinations clap cannot express.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
