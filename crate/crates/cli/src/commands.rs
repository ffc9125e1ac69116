//! Subcommand implementations. Every command emits a report envelope
//! `{kind, domain, inputs, outcome, oracles, caveats}` as text or JSON.

use serde_json::{json, Value};

use tatejac::io::{domain_str, parse_inline_series};
use tatejac::{
    adic_lift_inverse, bijectivity_oracle_with_budget, char_p_report, decay_profile,
    formal_inverse, generate_tame, lagrange_oracle, transfer_check, unimodular_witness, Domain,
    DomainSpec, MapFile, PolyMap, SeriesLiteral, TameSpec, TransferOptions, UnitCheck,
    WitnessOptions,
};

use crate::util::{
    emit, emit_all, parse_domain, parse_u64_list, read_map, read_series, run_parallel,
    write_json, CliError, CliResult,
};
use crate::{Cli, Command, OracleCommand};

pub fn run(cli: Cli) -> CliResult<()> {
    let json_output = cli.json;
    let jobs = cli.jobs;
    match cli.command {
        Command::Invert {
            map,
            degree,
            normalize,
            out,
        } => invert(json_output, &map, degree, normalize, out.as_deref()),
        Command::UnitCheck {
            series,
            series_file,
            domain,
            degree,
        } => unit_check(
            json_output,
            series.as_deref(),
            series_file.as_deref(),
            domain.as_deref(),
            degree,
        ),
        Command::Lift {
            map,
            g0,
            precision,
            degree,
            out,
        } => lift(json_output, &map, &g0, precision, degree, out.as_deref()),
        Command::Transfer {
            map,
            degree,
            precision,
            budget,
            out,
        } => transfer(json_output, &map, degree, precision, budget, out.as_deref()),
        Command::Profile { map } => profile(json_output, &map),
        Command::Witness {
            map,
            p,
            precision,
            degree,
            point,
        } => witness(
            json_output,
            jobs,
            &map,
            &p,
            precision,
            degree,
            point.as_deref(),
        ),
        Command::CharP { c, n, degree } => char_p(json_output, jobs, &c, n, degree),
        Command::Oracle { oracle } => match oracle {
            OracleCommand::Lagrange {
                series,
                domain,
                degree,
            } => oracle_lagrange(json_output, &series, &domain, degree),
            OracleCommand::Bijectivity {
                map,
                modulus,
                budget,
            } => oracle_bijectivity(json_output, &map, modulus, budget),
        },
        Command::Gen {
            seed,
            n,
            degree,
            length,
            domain,
            min_q_degree_two,
            no_linear,
            cap,
            out,
            out_inverse,
        } => gen(
            json_output,
            seed,
            n,
            degree,
            length,
            &domain,
            min_q_degree_two,
            no_linear,
            cap,
            out.as_deref(),
            out_inverse.as_deref(),
        ),
    }
}

fn map_value(map: &PolyMap) -> Value {
    serde_json::to_value(MapFile::from_map(map)).expect("map serializes")
}

fn envelope(
    kind: &str,
    domain: &DomainSpec,
    inputs: Value,
    outcome: Value,
    oracles: Vec<String>,
    caveats: Vec<String>,
) -> Value {
    json!({
        "kind": kind,
        "domain": domain,
        "inputs": inputs,
        "outcome": outcome,
        "oracles": oracles,
        "caveats": caveats,
    })
}

fn invert(
    json_output: bool,
    map_path: &str,
    degree: Option<u32>,
    normalize: bool,
    out: Option<&str>,
) -> CliResult<()> {
    let map = read_map(map_path)?;
    let cap = degree.unwrap_or_else(|| map.degree_cap());
    let mut oracles = vec![format!(
        "inverse computed by contraction iteration through degree {cap}"
    )];
    let mut caveats = Vec::new();
    let (outcome, inverse_for_file) = if normalize {
        let normalized = map.normalize()?;
        let inverse = formal_inverse(&normalized.map, cap)?;
        let shift: Vec<String> = normalized
            .shift
            .iter()
            .map(|s| s.to_coeff_string())
            .collect();
        let linear: Vec<Vec<String>> = normalized
            .linear
            .rows()
            .iter()
            .map(|row| row.iter().map(|e| e.to_coeff_string()).collect())
            .collect();
        let full_inverse = if normalized.shift.iter().all(|s| s.is_zero()) {
            let linear_inverse = normalized.linear.invert()?.as_linear_map(cap)?;
            Some(inverse.compose(&linear_inverse)?)
        } else {
            caveats.push(
                "the map has a nonzero constant term; reconstruct its inverse as \
                 X -> G'(L^-1 (X - shift)) from the affine data"
                    .into(),
            );
            None
        };
        let outcome = json!({
            "normalized_map": map_value(&normalized.map),
            "normalized_inverse": map_value(&inverse),
            "shift": shift,
            "linear": linear,
            "inverse": full_inverse.as_ref().map(map_value),
            "exact": inverse.is_exact(),
        });
        (outcome, full_inverse.unwrap_or(inverse))
    } else {
        let inverse = formal_inverse(&map, cap)?;
        oracles.push(
            "two-sided composition with the input is the identity at the truncation".into(),
        );
        let outcome = json!({
            "inverse": map_value(&inverse),
            "exact": inverse.is_exact(),
        });
        (outcome, inverse)
    };
    if !inverse_for_file.is_exact() {
        caveats.push("coefficients beyond the degree cap are unknown".into());
    }
    if let Some(path) = out {
        write_json(path, &MapFile::from_map(&inverse_for_file))?;
    }
    emit(
        json_output,
        &envelope(
            "invert",
            map.domain().spec(),
            json!({ "map": map_path, "degree_cap": cap, "normalize": normalize }),
            outcome,
            oracles,
            caveats,
        ),
    )
}

fn unit_check(
    json_output: bool,
    inline: Option<&str>,
    series_file: Option<&str>,
    domain: Option<&str>,
    degree: u32,
) -> CliResult<()> {
    let (series, input_desc) = match (inline, series_file) {
        (Some(text), None) => {
            let domain = parse_domain(domain.ok_or_else(|| {
                CliError::Io("--series requires --domain".into())
            })?)?;
            (
                parse_inline_series(text, &domain, None, degree)?,
                json!({ "series": text, "degree_cap": degree }),
            )
        }
        (None, Some(path)) => (read_series(path)?, json!({ "series_file": path })),
        _ => {
            return Err(CliError::Io(
                "provide exactly one of --series or --series-file".into(),
            ))
        }
    };
    let check = series.unit_check();
    let mut oracles = vec![
        "criterion: unit constant term and remaining coefficients in the radical".into(),
    ];
    let outcome = match &check {
        UnitCheck::Unit => {
            let inverse = series.invert_unit()?;
            let product_is_one = {
                let one = tatejac::TateSeries::one(
                    series.domain(),
                    series.variable_count(),
                    series.degree_cap(),
                )?;
                series.mul(&inverse)? == one
            };
            oracles.push(format!(
                "inverse from the geometric series of the unit decomposition; product with the \
                 input re-checked equal to 1 at the truncation: {product_is_one}"
            ));
            json!({
                "is_unit": true,
                "inverse": serde_json::to_value(SeriesLiteral::from_series(&inverse)).unwrap(),
                "product_is_one": product_is_one,
            })
        }
        other => json!({
            "is_unit": false,
            "certificate": other.describe(),
        }),
    };
    emit(
        json_output,
        &envelope(
            "unit_check",
            series.domain().spec(),
            input_desc,
            outcome,
            oracles,
            Vec::new(),
        ),
    )
}

fn lift(
    json_output: bool,
    map_path: &str,
    seed_path: &str,
    precision: u32,
    degree: Option<u32>,
    out: Option<&str>,
) -> CliResult<()> {
    let mut map = read_map(map_path)?;
    let mut seed = read_map(seed_path)?;
    if let Some(cap) = degree {
        map = map.with_cap(cap)?;
        seed = seed.with_cap(cap)?;
    }
    let outcome = adic_lift_inverse(&map, &seed, precision)?;
    if let Some(path) = out {
        write_json(path, &MapFile::from_map(&outcome.inverse))?;
    }
    let steps: Vec<Value> = outcome
        .steps
        .iter()
        .map(|s| json!({ "step": s.step, "error_valuation": s.error_valuation }))
        .collect();
    emit(
        json_output,
        &envelope(
            "lift",
            map.domain().spec(),
            json!({
                "map": map_path,
                "g0": seed_path,
                "precision": precision,
                "degree_cap": map.degree_cap(),
            }),
            json!({
                "inverse": map_value(&outcome.inverse),
                "steps": steps,
            }),
            vec![
                "error valuation measured on G o F - X before each corrective step".into(),
                format!(
                    "per-step contract: valuation >= min(2^k, {precision}), enforced at runtime"
                ),
            ],
            Vec::new(),
        ),
    )
}

fn transfer(
    json_output: bool,
    map_path: &str,
    degree: Option<u32>,
    precision: Option<u32>,
    budget: Option<u64>,
    out: Option<&str>,
) -> CliResult<()> {
    let map = read_map(map_path)?;
    let options = TransferOptions {
        degree,
        precision,
        enumeration_budget: budget,
        ..Default::default()
    };
    let outcome = transfer_check(&map, &options)?;
    if let (Some(path), Some(lifted)) = (out, outcome.lifted.as_ref()) {
        write_json(path, &MapFile::from_map(lifted))?;
    }
    let steps = outcome.lift_steps.as_ref().map(|steps| {
        steps
            .iter()
            .map(|s| json!({ "step": s.step, "error_valuation": s.error_valuation }))
            .collect::<Vec<_>>()
    });
    let caveats = if outcome.certified {
        Vec::new()
    } else {
        vec!["determination is heuristic; see the obstruction text".to_string()]
    };
    emit(
        json_output,
        &envelope(
            "transfer",
            map.domain().spec(),
            json!({ "map": map_path, "degree_cap": degree, "precision": precision }),
            json!({
                "invertible_mod_ideal": outcome.invertible_mod_ideal,
                "certified": outcome.certified,
                "obstruction": outcome.obstruction,
                "residue_inverse": outcome.residue_inverse.as_ref().map(map_value),
                "lifted": outcome.lifted.as_ref().map(map_value),
                "lift_steps": steps,
            }),
            outcome.notes,
            caveats,
        ),
    )
}

fn profile(json_output: bool, map_path: &str) -> CliResult<()> {
    let map = read_map(map_path)?;
    let profile = decay_profile(&map)?;
    emit(
        json_output,
        &envelope(
            "profile",
            map.domain().spec(),
            json!({ "map": map_path, "degree_cap": map.degree_cap() }),
            json!({
                "per_degree": profile.per_degree,
                "tail_floor": profile.tail_floor,
                "prefix_floor": profile.prefix_floor,
                "zero_valuation_degrees": profile.degrees_with_valuation(0),
                "last_unit_degree": profile.last_unit_degree(),
            }),
            vec!["valuations read from the stored coefficients; TOP marks empty degrees".into()],
            vec![format!(
                "degrees >= {} are unrepresented; membership claims stay truncation-relative",
                map.degree_cap()
            )],
        ),
    )
}

fn witness(
    json_output: bool,
    jobs: usize,
    map_path: &str,
    primes: &str,
    precision: u32,
    degree: Option<u32>,
    point: Option<&str>,
) -> CliResult<()> {
    let source = read_map(map_path)?;
    let primes = parse_u64_list(primes, "prime")?;
    for &p in &primes {
        if !tatejac::domain::is_prime(p) {
            return Err(CliError::Contract(tatejac::Error::NotPrime(p)));
        }
    }
    let reports = run_parallel(jobs, primes.len(), |i| -> CliResult<Value> {
        let p = primes[i];
        let target_domain = Domain::truncated(p, precision)?;
        let map = match source.domain().spec() {
            DomainSpec::TruncatedAdic { .. } => source.change_domain(&target_domain)?,
            _ => source.reinterpret_integral(&target_domain)?,
        };
        let cap = degree.unwrap_or_else(|| map.degree_cap());
        let options = WitnessOptions {
            point: match point {
                Some(text) => Some(
                    text.split(',')
                        .map(|part| target_domain.parse_element(part.trim()))
                        .collect::<tatejac::Result<Vec<_>>>()?,
                ),
                None => None,
            },
            window: None,
        };
        let report = unimodular_witness(&map, cap, &options)?;
        serde_json::to_value(&report)
            .map_err(|e| CliError::Io(format!("serialization failed: {e}")))
    });
    let reports = reports.into_iter().collect::<CliResult<Vec<_>>>()?;
    emit_all(json_output, &reports)
}

fn char_p(json_output: bool, jobs: usize, c_list: &str, n: usize, degree: u32) -> CliResult<()> {
    let exponents = parse_u64_list(c_list, "exponent")?;
    let reports = run_parallel(jobs, exponents.len(), |i| -> CliResult<Value> {
        let report = char_p_report(exponents[i], n, degree)?;
        serde_json::to_value(&report)
            .map_err(|e| CliError::Io(format!("serialization failed: {e}")))
    });
    let reports = reports.into_iter().collect::<CliResult<Vec<_>>>()?;
    emit_all(json_output, &reports)
}

fn oracle_lagrange(
    json_output: bool,
    series_text: &str,
    domain_text: &str,
    degree: u32,
) -> CliResult<()> {
    let domain = parse_domain(domain_text)?;
    let series = parse_inline_series(series_text, &domain, Some(1), degree)?;
    let inverse = lagrange_oracle(&series, degree)?;
    let substituted = series.compose(std::slice::from_ref(&inverse))?;
    let identity = tatejac::TateSeries::variable(&domain, 1, 0, inverse.degree_cap())?;
    emit(
        json_output,
        &envelope(
            "oracle_lagrange",
            domain.spec(),
            json!({ "series": series_text, "degree_cap": degree }),
            json!({
                "inverse": serde_json::to_value(SeriesLiteral::from_series(&inverse)).unwrap(),
                "substitution_is_identity": substituted == identity,
            }),
            vec![
                "coefficients by Lagrange extraction [x^k] g = (1/k) [x^{k-1}] (x/f)^k over Q"
                    .into(),
                "cross-checked by substituting the inverse back into the series".into(),
            ],
            Vec::new(),
        ),
    )
}

fn oracle_bijectivity(
    json_output: bool,
    map_path: &str,
    modulus: u64,
    budget: Option<u64>,
) -> CliResult<()> {
    let map = read_map(map_path)?;
    let budget =
        budget.unwrap_or_else(tatejac::harness::oracle::default_enumeration_budget);
    let bijective = bijectivity_oracle_with_budget(&map, modulus, budget)?;
    emit(
        json_output,
        &envelope(
            "oracle_bijectivity",
            map.domain().spec(),
            json!({ "map": map_path, "modulus": modulus, "budget": budget }),
            json!({ "bijective": bijective }),
            vec![format!(
                "exhaustive enumeration of all {modulus}^{} points",
                map.dimension()
            )],
            Vec::new(),
        ),
    )
}

#[allow(clippy::too_many_arguments)]
fn gen(
    json_output: bool,
    seed: u64,
    n: usize,
    degree: u32,
    length: u32,
    domain_text: &str,
    min_q_degree_two: bool,
    no_linear: bool,
    cap: Option<u32>,
    out: Option<&str>,
    out_inverse: Option<&str>,
) -> CliResult<()> {
    let domain = parse_domain(domain_text)?;
    let mut spec = TameSpec::new(seed, n, degree, length, domain.clone());
    if min_q_degree_two {
        spec.min_poly_degree = 2;
    }
    spec.linear_factors = !no_linear;
    spec.cap = cap;
    let pair = generate_tame(&spec)?;
    if let Some(path) = out {
        write_json(path, &MapFile::from_map(&pair.forward))?;
    }
    if let Some(path) = out_inverse {
        write_json(path, &MapFile::from_map(&pair.inverse))?;
    }
    let identity_checked = pair.forward.compose(&pair.inverse)?.is_identity()
        && pair.inverse.compose(&pair.forward)?.is_identity();
    emit(
        json_output,
        &envelope(
            "generate",
            domain.spec(),
            json!({
                "seed": seed,
                "n": n,
                "degree_bound": degree,
                "length": length,
                "domain": domain_str(domain.spec()),
            }),
            json!({
                "map": map_value(&pair.forward),
                "inverse": map_value(&pair.inverse),
                "factors": pair.factors,
                "composition_is_identity": identity_checked,
                "degree_cap": pair.forward.degree_cap(),
            }),
            vec!["inverse assembled from the closed-form inverses of the factors; two-sided \
                  composition re-checked"
                .into()],
            Vec::new(),
        ),
    )
}
