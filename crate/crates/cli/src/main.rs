//! `pirank`: primitivity rank, w-subgroups, stackings, dependence-theorem
//! verification, one-relator pushouts and immersion classification from the
//! command line.
//!
//! Exit codes: 0 success, 2 malformed input, 3 budget exceeded,
//! 4 hypothesis/precondition failure, 5 a checked inequality or invariant failed
//! on a concrete instance (the loudest alarm: it means the implementation
//! or the theory broke).

use clap::{Parser, Subcommand};
use pirank_core::adjunction::{
    self, build, classify_dependence, hypothesis_checklist, updown_check,
    verify_dependence_theorem, HypothesisChecklist,
};
use pirank_core::fuzz;
use pirank_core::graph::write_graph;
use pirank_core::prank::{
    negative_immersions_verdict, peripheral_subgroup, primitivity_rank_with_budget, PiValue,
};
use pirank_core::stacking::{find_stacking, verify_stacking};
use pirank_core::twocomplex::{
    classify_immersion, one_relator_complex, parse_branched_map_file, parse_complex,
    pushout_inequality, BranchedMap, Classification,
};
use pirank_core::words::{Alphabet, Word};
use pirank_core::Error;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pirank", version, about = "combinatorics of one-relator complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Primitivity rank, verdict and w-subgroups of a word.
    Rank {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        json: bool,
        /// Maximum partition-search nodes.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// A stacking of an indivisible cyclically reduced word.
    Stack {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Verify the dependence theorem on an instance file.
    Verify {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// One-relator pushout and the pushout inequality of a branched map.
    Pushout {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Classify an immersion into the one-relator complex of a word.
    Classify {
        word: String,
        file: PathBuf,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Property fuzzing: updown, dependence, pushout or stacking.
    Fuzz {
        kind: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long)]
        json: bool,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => 2,
        Error::Domain(_) => 4,
        Error::Budget(_) => 3,
        Error::Hypothesis(_) => 4,
        Error::Falsified(_) => 5,
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn parse_word(word: &str, rank: Option<usize>) -> Result<(Word, Alphabet), Error> {
    let alphabet = Alphabet::infer(word, rank)?;
    let parsed = alphabet.parse_word(word)?;
    Ok((parsed, alphabet))
}

fn checklist_line(c: &HypothesisChecklist) -> String {
    let flag = |b: bool| if b { "pass" } else { "fail" };
    format!(
        "hypotheses: DI={} circle={} indivisible={} covering={}",
        flag(c.diagrammatically_irreducible),
        flag(c.s_is_circle),
        flag(c.w_indivisible),
        flag(c.sigma_covering)
    )
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Rank {
            word,
            rank,
            json,
            budget,
        } => cmd_rank(&word, rank, json, budget),
        Command::Stack { word, rank, json } => cmd_stack(&word, rank, json),
        Command::Verify { file, json } => cmd_verify(&file, json),
        Command::Pushout { file, json } => cmd_pushout(&file, json),
        Command::Classify {
            word,
            file,
            rank,
            json,
        } => cmd_classify(&word, &file, rank, json),
        Command::Fuzz {
            kind,
            seed,
            trials,
            json,
        } => cmd_fuzz(&kind, seed, trials, json),
    }
}

#[derive(Serialize)]
struct SubgroupOut {
    rank: usize,
    graph: String,
    relator_in_basis: String,
    presentation: String,
}

#[derive(Serialize)]
struct RankOut {
    word: String,
    rank: usize,
    pi: String,
    verdict: String,
    is_trivial: bool,
    is_primitive: bool,
    is_proper_power: bool,
    conjugator: String,
    peripheral_subgroup: bool,
    w_subgroups: Vec<SubgroupOut>,
}

fn cmd_rank(
    word: &str,
    rank: Option<usize>,
    json: bool,
    budget: Option<u64>,
) -> Result<(), Error> {
    let (w, alphabet) = parse_word(word, rank)?;
    let ambient = alphabet.rank();
    let report = match primitivity_rank_with_budget(&w, ambient, budget) {
        Ok(report) => report,
        Err(e @ Error::Budget(_)) => {
            // Partial report: the cheap flags are known before the
            // partition search runs out.
            let (core_word, _) = pirank_core::words::cyclic_reduce(&w);
            let is_power = !core_word.is_empty()
                && pirank_core::words::maximal_root(&core_word)
                    .map(|r| r.exponent >= 2)
                    .unwrap_or(false);
            let primitive = pirank_core::whitehead::is_primitive(&core_word, ambient);
            println!(
                "pi=unknown (budget exceeded) flags-known: trivial={} primitive={} proper-power={}",
                core_word.is_empty(),
                primitive,
                is_power
            );
            return Err(e);
        }
        Err(e) => return Err(e),
    };
    let peripheral = peripheral_subgroup(&report)?;
    let verdict = negative_immersions_verdict(&report);
    let subgroups: Vec<SubgroupOut> = report
        .w_subgroups
        .iter()
        .map(|s| {
            let basis_alphabet = Alphabet::canonical(s.rank.max(1));
            SubgroupOut {
                rank: s.rank,
                graph: write_graph(&s.graph, &alphabet),
                relator_in_basis: basis_alphabet.display_word(&s.w_in_basis),
                presentation: format!(
                    "<{} generators | {}>",
                    s.presentation.0,
                    basis_alphabet.display_word(&s.presentation.1)
                ),
            }
        })
        .collect();
    let out = RankOut {
        word: word.to_string(),
        rank: ambient,
        pi: report.pi.to_string(),
        verdict: verdict.to_string(),
        is_trivial: report.is_trivial,
        is_primitive: report.is_primitive,
        is_proper_power: report.is_proper_power,
        conjugator: alphabet.display_word(&report.conjugator),
        peripheral_subgroup: peripheral.is_some(),
        w_subgroups: subgroups,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        let mut flags = Vec::new();
        if out.is_trivial {
            flags.push("trivial");
        }
        if out.is_primitive {
            flags.push("primitive");
        }
        if out.is_proper_power {
            flags.push("proper-power");
        }
        println!(
            "pi={} verdict={}{}",
            out.pi,
            out.verdict,
            if flags.is_empty() {
                String::new()
            } else {
                format!(" flags={}", flags.join(","))
            }
        );
        if !out.conjugator.is_empty() {
            println!("conjugator={}", out.conjugator);
        }
        if report.pi == PiValue::Finite(2) {
            println!("unique peripheral subgroup");
        }
        for (i, s) in out.w_subgroups.iter().enumerate() {
            println!(
                "w-subgroup {}/{}: rank={} presentation={}",
                i + 1,
                out.w_subgroups.len(),
                s.rank,
                s.presentation
            );
            print!("{}", s.graph);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct StackOut {
    word: String,
    vertex_fiber: Vec<usize>,
    edge_fibers: std::collections::BTreeMap<String, Vec<usize>>,
}

fn cmd_stack(word: &str, rank: Option<usize>, json: bool) -> Result<(), Error> {
    let (w, alphabet) = parse_word(word, rank)?;
    let st = find_stacking(&w, alphabet.rank())?;
    debug_assert_eq!(verify_stacking(&w, &st), Ok(true));
    let edge_fibers: std::collections::BTreeMap<String, Vec<usize>> = st
        .edge_fibers
        .iter()
        .map(|(&lab, v)| {
            (
                alphabet.display_letter(lab as i32).to_string(),
                v.clone(),
            )
        })
        .collect();
    let out = StackOut {
        word: word.to_string(),
        vertex_fiber: st.vertex_fiber.clone(),
        edge_fibers,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        let fmt = |v: &[usize]| {
            v.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        println!("vertex fiber: {}", fmt(&out.vertex_fiber));
        for (lab, fiber) in &out.edge_fibers {
            println!("edge fiber {lab}: {}", fmt(fiber));
        }
    }
    Ok(())
}

fn cmd_verify(file: &PathBuf, json: bool) -> Result<(), Error> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::Input(format!("{}: {e}", file.display())))?;
    let instance = adjunction::parse_instance(&text)?;
    let checklist = hypothesis_checklist(&instance)?;
    if !checklist.all_hold() {
        if json {
            println!("{}", serde_json::to_string_pretty(&checklist).unwrap());
        } else {
            println!("{}", checklist_line(&checklist));
        }
        return Err(Error::Hypothesis(
            "dependence-theorem hypotheses fail on this instance".into(),
        ));
    }
    let walk = instance.s_walk()?;
    let st = find_stacking(&walk.word, instance.rank)?;
    let report = verify_dependence_theorem(&instance, &st)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("{}", checklist_line(&report.checklist));
        let dep = if report.classification.independent {
            "independent"
        } else {
            "dependent"
        };
        let strength = if report.classification.strongly_independent {
            "strongly independent"
        } else {
            "weakly dependent"
        };
        println!("classification: {dep}, {strength}");
        println!(
            "chi(Gamma)={} deg(sigma)={} chi(Gamma_u)={} chi(Gamma_u^I)={} chi(W)={} chi(C)={}",
            report.chi_gamma,
            report.deg_sigma,
            report.chi_gamma_u,
            report.chi_gamma_u_immersed,
            report.chi_w,
            report.chi_c.map_or("-".to_string(), |c| c.to_string()),
        );
        if report.inequality_asserted {
            println!(
                "weakly dependent: {} <= {} {}{}",
                report.lhs,
                report.chi_gamma_u,
                if report.inequality_holds { "OK" } else { "VIOLATED" },
                if report.equality { " (equality)" } else { "" }
            );
        } else {
            println!("strongly independent: inequality not asserted");
        }
        if report.w_cycles_asserted {
            println!(
                "w-cycles: chi(Gamma)+deg(sigma) = {} <= 0 {}",
                report.chi_gamma + report.deg_sigma as i64,
                if report.w_cycles_holds { "OK" } else { "VIOLATED" }
            );
        }
    }
    Ok(())
}

fn cmd_pushout(file: &PathBuf, json: bool) -> Result<(), Error> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::Input(format!("{}: {e}", file.display())))?;
    let f = parse_branched_map_file(&text)?;
    let report = pushout_inequality(&f)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("hypotheses: DI=pass circle=pass indivisible=pass covering=pass");
        println!(
            "faces={} degree-sum={} branching-excess={}",
            f.y.faces.len(),
            f.degree_sum(),
            report.branching_excess
        );
        println!(
            "boundary coverage: {}",
            if report.hypothesis_holds {
                "not two-to-one (inequality asserted)"
            } else {
                "at least two-to-one (inequality not asserted)"
            }
        );
        if report.inequality_asserted {
            println!(
                "pushout inequality: {} + {} <= {} {}{}",
                report.chi_y,
                report.branching_excess,
                report.chi_y_hat,
                if report.inequality_holds { "OK" } else { "VIOLATED" },
                if report.tight { " (tight)" } else { "" }
            );
        }
    }
    Ok(())
}

fn cmd_classify(
    word: &str,
    file: &PathBuf,
    rank: Option<usize>,
    json: bool,
) -> Result<(), Error> {
    let (w, alphabet) = parse_word(word, rank)?;
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::Input(format!("{}: {e}", file.display())))?;
    let y = parse_complex(&text, &alphabet)?;
    let x = one_relator_complex(&w, alphabet.rank())?;
    let f = BranchedMap::infer(y, x)?;
    let pr = primitivity_rank_with_budget(&w, alphabet.rank(), None)?;
    let classification = classify_immersion(&f, &pr)?;
    let verdict = match &classification {
        Classification::ReducesToGraph { .. } => "reduces-to-graph".to_string(),
        Classification::FactorsThroughQ { index } => format!("factors-through-Q {}", index + 1),
        Classification::BoundaryCaseViolation => "boundary-case-violation".to_string(),
    };
    #[derive(Serialize)]
    struct ClassifyOut {
        word: String,
        pi: String,
        chi_y: i64,
        verdict: String,
    }
    let out = ClassifyOut {
        word: word.to_string(),
        pi: pr.pi.to_string(),
        chi_y: f.y.chi(),
        verdict: verdict.clone(),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("hypotheses: DI=pass circle=pass indivisible=n/a covering=pass");
        println!("pi={} chi(Y)={} verdict={}", out.pi, out.chi_y, out.verdict);
    }
    if matches!(classification, Classification::BoundaryCaseViolation) {
        return Err(Error::Falsified(
            "classification hit the boundary-case violation".into(),
        ));
    }
    Ok(())
}

fn cmd_fuzz(kind: &str, seed: u64, trials: u64, json: bool) -> Result<(), Error> {
    let mut rng = fuzz::rng_from_seed(seed);
    let summary = match kind {
        "updown" => {
            for _ in 0..trials {
                let (b, order) = fuzz::random_bipartite(&mut rng, 12, 12);
                updown_check(&b, &order)?;
            }
            format!("{trials}/{trials} instances: >=2 good vertices")
        }
        "dependence" => {
            let params = fuzz::DependenceFuzzParams {
                rank: 3,
                ..Default::default()
            };
            let mut verified = 0u64;
            let mut equalities = 0u64;
            let mut attempts = 0u64;
            while verified < trials {
                attempts += 1;
                if attempts > 1000 * trials {
                    return Err(Error::Budget(format!(
                        "only {verified}/{trials} weakly dependent instances found"
                    )));
                }
                let generated = if attempts % 4 == 0 {
                    fuzz::random_quotient_instance(&mut rng, 2, 6, 12)
                } else {
                    fuzz::random_dependence_instance(&mut rng, &params)
                };
                let Some((instance, _)) = generated else { continue };
                let walk = instance.s_walk()?;
                let Ok(st) = find_stacking(&walk.word, instance.rank) else {
                    continue;
                };
                let space = build(&instance)?;
                if classify_dependence(&space).strongly_independent {
                    continue;
                }
                let report = verify_dependence_theorem(&instance, &st)?;
                debug_assert!(report.inequality_asserted && report.inequality_holds);
                if report.equality {
                    equalities += 1;
                }
                verified += 1;
            }
            format!(
                "{trials}/{trials} weakly dependent instances: inequality holds ({equalities} equalities)"
            )
        }
        "pushout" => {
            let mut verified = 0u64;
            let mut attempts = 0u64;
            while verified < trials {
                attempts += 1;
                if attempts > 1000 * trials {
                    return Err(Error::Budget(format!(
                        "only {verified}/{trials} branched maps generated"
                    )));
                }
                let rank = 2 + (attempts % 2) as usize;
                let w = fuzz::random_indivisible_word(&mut rng, rank, 2, 6);
                let Some(f) = fuzz::random_branched_map(&mut rng, &w, rank, 4, 10) else {
                    continue;
                };
                pushout_inequality(&f)?;
                verified += 1;
            }
            format!("{trials}/{trials} branched maps: pushout inequality holds")
        }
        "stacking" => {
            for i in 0..trials {
                let rank = 2 + (i % 2) as usize;
                let w = fuzz::random_indivisible_word(&mut rng, rank, 1, 12);
                let st = find_stacking(&w, rank)?;
                if verify_stacking(&w, &st)? != true {
                    return Err(Error::Falsified("stacking failed verification".into()));
                }
            }
            format!("{trials}/{trials} indivisible words: stacking found and verified")
        }
        other => {
            return Err(Error::Input(format!(
                "unknown fuzz kind {other:?} (expected updown, dependence, pushout or stacking)"
            )))
        }
    };
    if json {
        #[derive(Serialize)]
        struct FuzzOut<'a> {
            kind: &'a str,
            seed: u64,
            trials: u64,
            summary: String,
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&FuzzOut {
                kind,
                seed,
                trials,
                summary
            })
            .unwrap()
        );
    } else {
        println!("{summary}");
    }
    Ok(())
}
