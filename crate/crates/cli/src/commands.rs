//! One function per subcommand; each returns its manifest and report body.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;
use std::time::Duration;

use num_rational::BigRational;
use num_traits::{One, Zero};

use cubic_core::cohomology::{census_report, invariant_rank, AbelianInvariants, PicMat, PicardModel};
use cubic_core::hexahedral::{
    coble_disc, critical_primes, frobenius_line_action, galois_image, CriticalOptions, SexticSpec,
};
use cubic_core::local_arith::evaluation::{EvaluationFunction, EvaluationOptions, Measure};
use cubic_core::local_arith::singular::{has_bad_reduction, partials_resultant};
use cubic_core::local_arith::{
    brauer_allowed_fraction, count_points_mod, leray_density_real, local_evaluation_table, p_adic_mass,
    tamagawa_density, LocalMassTable, Place, RealDensityOptions, RealRegion, SurfaceModel, TritangentData,
};
use cubic_core::peyre::{
    alpha, artin_l_value, beta, peyre_constant, search_points, AdelicMass, PeyreComponents, Provenance, Sourced,
};
use cubic_core::subgroups::{
    enumerate_subgroup_classes, subgroup_classes, u1_classes, SearchBudget, SubgroupClassRecord,
};
use cubic_core::weyl::{context, u1};

use crate::manifest::RunManifest;
use crate::{CensusArgs, CliError, CountArgs, EvaluateArgs, PeyreArgs, SearchArgs, SurfaceArgs};

type Output = Result<(RunManifest, String), CliError>;

fn parse<T: std::str::FromStr<Err = cubic_core::ParseError>>(m: &mut RunManifest, path: &Path) -> Result<T, CliError> {
    let text = m.read(path)?;
    text.parse().map_err(|e: cubic_core::ParseError| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn census(a: &CensusArgs) -> Output {
    let mut m = RunManifest::new("census");
    m.param("fusion", !a.no_fusion).param("stretch", a.stretch);
    if let Some(s) = a.max_seconds {
        m.param("max_seconds", s);
    }
    let budget = SearchBudget { max_time: a.max_seconds.map(Duration::from_secs), ..Default::default() };
    let weyl = &context().weyl;
    let ambient = if a.stretch { weyl } else { u1() };
    let mut records = if a.no_fusion {
        subgroup_classes(ambient, budget)?.into_iter().map(SubgroupClassRecord::new).collect()
    } else {
        enumerate_subgroup_classes(ambient, weyl, budget)?
    };
    let summary = census_report(&mut records);
    let mut out = String::new();
    if a.table {
        writeln!(out, "order\torbits\tsixer\tfused\tH1").unwrap();
        for r in &records {
            let orbits: Vec<String> = r.orbit_structure.iter().map(usize::to_string).collect();
            let h1 = r.h1.as_ref().map_or("-".into(), AbelianInvariants::to_string);
            writeln!(out, "{}\t[{}]\t{}\t{}\t{h1}", r.order, orbits.join(","), r.stabilizes_sixer, r.fused_from)
                .unwrap();
        }
    }
    writeln!(out, "{summary}").unwrap();
    writeln!(out, "{} classes / {} trivial", summary.total, summary.trivial).unwrap();
    Ok((m, out))
}

pub fn surface(a: &SurfaceArgs) -> Output {
    let mut m = RunManifest::new("surface");
    let f: SexticSpec = parse(&mut m, &a.sextic)?;
    let s: SurfaceModel = parse(&mut m, &a.surface)?;
    m.param("bound", a.bound);
    if !a.annotated.is_empty() {
        m.param("annotated", format!("{:?}", a.annotated));
    }
    let opts = CriticalOptions { search_bound: a.bound, annotated: a.annotated.clone() };
    let report = critical_primes(&f, &s, &opts)?;
    Ok((m, format!("{report}\n")))
}

fn frobenius_sampler(f: &SexticSpec) -> Result<impl Fn(u64) -> Option<PicMat> + Sync + '_, CliError> {
    let core = coble_disc(f)?.core;
    Ok(move |p| frobenius_line_action(f, p, &core).ok().map(|fr| PicardModel::shared().action(&fr.perm)))
}

pub fn count(a: &CountArgs) -> Output {
    let mut m = RunManifest::new("count");
    let s: SurfaceModel = parse(&mut m, &a.surface)?;
    let f: Option<SexticSpec> = a.sextic.as_ref().map(|p| parse(&mut m, p)).transpose()?;
    m.param("primes", format!("{:?}", a.primes)).param("level", a.level);
    let mut out = String::new();
    let resultant = partials_resultant(&s);
    for &p in &a.primes {
        if !cubic_core::arith::is_prime(p) {
            return Err(CliError::Input(format!("{p} is not prime")));
        }
        let bad = has_bad_reduction(&s, p, &resultant);
        writeln!(out, "p = {p}  reduction {}", if bad { "bad" } else { "good" }).unwrap();
        for k in 1..=a.level {
            writeln!(out, "  #S(Z/{p}^{k}) = {}  [computed]", count_points_mod(&s, p, k)?).unwrap();
        }
        writeln!(out, "  p-adic mass = {}  [computed]", Measure::Exact(p_adic_mass(&s, p)?)).unwrap();
        if let Some(f) = &f {
            let core = coble_disc(f)?.core;
            match frobenius_line_action(f, p, &core).and_then(|fr| Ok((tamagawa_density(&s, &fr, p)?, fr))) {
                Ok((tau, fr)) => writeln!(
                    out,
                    "  Frobenius cycle type {:?} flip {} trace {}\n  tau_p = {}  [computed]",
                    fr.cycle_type,
                    fr.flip,
                    fr.trace,
                    Measure::Exact(tau)
                )
                .unwrap(),
                Err(e) => writeln!(out, "  tau_p unavailable: {e}").unwrap(),
            }
        }
    }
    if a.real_samples > 0 {
        m.param("real_samples", a.real_samples);
        m.seed = Some(a.seed);
        let opts = RealDensityOptions { samples: a.real_samples, seed: a.seed, ..Default::default() };
        let r = leray_density_real(&s, RealRegion::Full, opts);
        writeln!(out, "tau_inf = {}+-{}  [computed; Monte Carlo]", r.total.value, r.total.stderr).unwrap();
        for (i, c) in r.components.iter().enumerate() {
            writeln!(out, "  component {i}: {}+-{}", c.value, c.stderr).unwrap();
        }
    }
    Ok((m, out))
}

pub fn evaluate(a: &EvaluateArgs) -> Output {
    let mut m = RunManifest::new("evaluate");
    let supplied = if a.published_tables { Provenance::Published } else { Provenance::UserSupplied };
    let mut tables: BTreeMap<String, (LocalMassTable, Provenance)> = BTreeMap::new();
    if !a.places.is_empty() {
        let (Some(tri), Some(surf), Some(sex)) = (&a.tritangent, &a.surface, &a.sextic) else {
            return Err(CliError::Input("computing tables needs --tritangent, --surface and --sextic".into()));
        };
        let data: TritangentData = parse(&mut m, tri)?;
        let s: SurfaceModel = parse(&mut m, surf)?;
        let f: SexticSpec = parse(&mut m, sex)?;
        let core = coble_disc(&f)?.core;
        let g = EvaluationFunction::new(data)?;
        m.param("places", format!("{:?}", a.places)).param("max_level", a.max_level);
        for &p in &a.places {
            let t = local_evaluation_table(&s, &g, &core, p, EvaluationOptions { max_level: a.max_level })?;
            tables.insert(Place::Finite(p).to_string(), (t, Provenance::Computed));
        }
    }
    for path in &a.tables {
        let t: LocalMassTable = parse(&mut m, path)?;
        tables.insert(t.place.to_string(), (t, supplied));
    }
    let group = if !a.group.is_empty() {
        AbelianInvariants(a.group.clone())
    } else {
        tables.values().next().map_or(AbelianInvariants(vec![2]), |(t, _)| t.group.clone())
    };
    m.param("group", &group);
    let mut out = String::new();
    for (place, (t, src)) in &tables {
        writeln!(out, "table at {place}  [{src}]").unwrap();
        for (c, mass) in &t.entries {
            let c: Vec<String> = c.iter().map(ToString::to_string).collect();
            writeln!(out, "  ({})  {mass}", c.join(", ")).unwrap();
        }
        if !t.unresolved.is_zero() {
            writeln!(out, "  unresolved {}", t.unresolved).unwrap();
        }
    }
    let list: Vec<LocalMassTable> = tables.into_values().map(|(t, _)| t).collect();
    let fraction = brauer_allowed_fraction(&list, &group)?;
    writeln!(out, "critical places: {}", list.len()).unwrap();
    writeln!(out, "fraction {fraction}  [computed]").unwrap();
    Ok((m, out))
}

pub fn peyre(a: &PeyreArgs) -> Output {
    let mut m = RunManifest::new("peyre");
    let s: SurfaceModel = parse(&mut m, &a.surface)?;
    let f: SexticSpec = parse(&mut m, &a.sextic)?;
    m.param("cutoff", a.cutoff).param("image_bound", a.image_bound).param("bound", a.bound);
    let split = coble_disc(&f)?;
    let image = galois_image(&f, &split, a.image_bound);
    let mut out = String::new();
    let (pic_rank, h1) = match image.best() {
        Some(best) => {
            let group = &u1_classes()[best.class];
            writeln!(
                out,
                "galois image   order {} H1 {} (margin {:.3}, {} primes <= {}) [computed]",
                best.order,
                best.h1,
                image.h1_margin(),
                image.sampled,
                a.image_bound
            )
            .unwrap();
            (invariant_rank(group), Some(best.h1.clone()))
        }
        None => {
            writeln!(out, "galois image   undetermined; rank 1 assumed").unwrap();
            (1, None)
        }
    };

    let measure = |text: &str, what: &str| -> Result<Measure, CliError> {
        text.parse().map_err(|e: cubic_core::ParseError| CliError::Input(format!("--{what}: {e}")))
    };
    let alpha_c = match &a.alpha {
        Some(t) => match measure(t, "alpha")? {
            Measure::Exact(q) => Some(Sourced::new(q, Provenance::UserSupplied)),
            _ => return Err(CliError::Input("--alpha must be an exact rational".into())),
        },
        // Pic^G = Z·(−K) at rank one, with (−K)² = 3.
        None if pic_rank == 1 => {
            Some(Sourced::new(alpha(&[vec![3]], &[vec![1]], &[BigRational::one()])?, Provenance::Computed))
        }
        None => None,
    };
    let beta_c = match (a.beta, &h1) {
        (Some(b), _) => Some(Sourced::new(b, Provenance::UserSupplied)),
        (None, Some(h)) => Some(Sourced::new(beta(h), Provenance::Computed)),
        (None, None) => None,
    };
    let l_value = match &a.l_value {
        Some(t) => Sourced::new(measure(t, "l-value")?, Provenance::UserSupplied),
        None => Sourced::new(artin_l_value(frobenius_sampler(&f)?, pic_rank, a.cutoff).measure(), Provenance::Computed),
    };
    let adelic_mass = a
        .adelic_mass
        .as_ref()
        .map(|t| -> Result<AdelicMass, CliError> {
            Ok(AdelicMass {
                factors: vec![("H(Br)".into(), Sourced::new(measure(t, "adelic-mass")?, Provenance::UserSupplied))],
                brauer_fraction: None,
            })
        })
        .transpose()?;
    let actual_count = a.search.map(|b| {
        m.param("search", b);
        Sourced::new(search_points(&s, b).count() as u64, Provenance::Computed)
    });
    let report = peyre_constant(PeyreComponents {
        pic_rank,
        alpha: alpha_c,
        beta: beta_c,
        l_value: Some(l_value),
        adelic_mass,
        tau_published: a.tau_published,
        actual_count,
    });
    write!(out, "{report}").unwrap();
    match (report.tau(), report.predicted_count(a.bound as f64)) {
        (Some((_, src)), Some(n)) => {
            writeln!(out, "predicted_count({}) = {}  [from {src} tau]", a.bound, n.round() as u64).unwrap()
        }
        _ => writeln!(out, "predicted_count({}) absent", a.bound).unwrap(),
    }
    Ok((m, out))
}

pub fn search(a: &SearchArgs) -> Output {
    let mut m = RunManifest::new("search");
    let s: SurfaceModel = parse(&mut m, &a.surface)?;
    if a.bound < 1 {
        return Err(CliError::Input("--bound must be at least 1".into()));
    }
    m.param("bound", a.bound);
    let found = search_points(&s, a.bound);
    let mut out = format!("bound {}\ncount {}  [computed]\n", a.bound, found.count());
    match &a.points {
        Some(path) => {
            std::fs::write(path, found.to_file_string())
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            m.param("points", path.display());
        }
        None => out += &found.to_file_string(),
    }
    Ok((m, out))
}
