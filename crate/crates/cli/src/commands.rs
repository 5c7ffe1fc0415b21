//! One function per subcommand. Each returns a [`Report`] for standard
//! output and writes any additional files itself.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde_json::{json, Value};

use netmanifold::corpus::build_sample;
use netmanifold::edges::edge_z_table;
use netmanifold::explore::{classical_mds, distance_matrix, ward_clustering};
use netmanifold::io::{
    load_sample, read_corpus_manifest, read_laplacian, write_laplacian, write_manifest, write_text, write_vocabulary,
    Manifest, ManifestEntry,
};
use netmanifold::means::{interpolation_path, sample_mean};
use netmanifold::metrics::f_alpha;
use netmanifold::pca::{tangent_pca, word_importance};
use netmanifold::regression::{fit, lrt_covariate, predict};
use netmanifold::tangent::to_tangent;
use netmanifold::twosample::{asymptotic_test, permutation_test};
use netmanifold::{
    AnalysisConfig, EdgeZParams, NetworkSample, OffsetPolicy, Projector, TestMethod, VarianceModel, WardVariant,
};

use crate::output::{num, Report, Table};
use crate::{
    ClusterArgs, DistArgs, EdgesArgs, IngestArgs, InterpolateArgs, MdsArgs, MeanArgs, PcaArgs, RegressArgs, Test2Args,
};

fn envelope(command: &str, config: &AnalysisConfig, result: Value) -> Value {
    json!({ "command": command, "config": config, "result": result })
}

/// A file-system safe stem for an observation label.
fn file_stem(label: &str) -> String {
    let stem: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    if stem.is_empty() || stem.starts_with('.') {
        format!("doc_{stem}")
    } else {
        stem
    }
}

fn node_labels(sample: &NetworkSample) -> Vec<String> {
    sample
        .node_labels()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| (1..=sample.dim()).map(|k| k.to_string()).collect())
}

/// The two groups to compare: the explicit pair, or the only two groups the
/// manifest defines.
fn two_groups(
    sample: &NetworkSample,
    groups: &Option<Vec<String>>,
) -> Result<(NetworkSample, NetworkSample, [String; 2])> {
    let names = match groups {
        Some(g) if g.len() == 2 => [g[0].clone(), g[1].clone()],
        Some(g) => bail!(netmanifold::Error::InvalidParameter(format!(
            "--groups needs exactly two names, got {}",
            g.len()
        ))),
        None => {
            let found = sample.group_names();
            if found.len() != 2 {
                bail!(netmanifold::Error::InvalidParameter(format!(
                    "the manifest defines {} groups ({}); choose two with --groups A,B",
                    found.len(),
                    found.join(", ")
                )));
            }
            [found[0].clone(), found[1].clone()]
        }
    };
    let (a, b) = sample.split_groups(&names[0], &names[1])?;
    Ok((a, b, names))
}

pub fn ingest(args: &IngestArgs, config: &AnalysisConfig) -> Result<Report> {
    let manifest = read_corpus_manifest(&args.manifest, args.m, args.span)?;
    let corpus = build_sample(&manifest)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_vocabulary(&args.out.join("vocab.txt"), corpus.vocabulary.words())?;

    let sample = &corpus.sample;
    let groups = sample.groups().unwrap_or_default();
    let covariates = sample.covariates().unwrap_or_default();
    let mut entries = Vec::new();
    let mut table = Table::new(["label", "group", "file"]);
    let mut used = std::collections::HashSet::new();
    for (k, (id, l)) in sample.ids().iter().zip(sample.observations()).enumerate() {
        let mut stem = file_stem(id);
        if !used.insert(stem.clone()) {
            stem = format!("{stem}_{}", k + 1);
            used.insert(stem.clone());
        }
        let file = format!("{stem}.csv");
        write_laplacian(&args.out.join(&file), l)?;
        table.push(vec![id.clone(), groups[k].clone(), file.clone()]);
        entries.push(ManifestEntry {
            path: PathBuf::from(&file),
            label: id.clone(),
            group: groups[k].clone(),
            covariates: covariates[k].clone(),
        });
    }
    write_manifest(
        &args.out.join("manifest.tsv"),
        &Manifest {
            covariate_names: sample.covariate_names().to_vec(),
            entries,
        },
    )?;
    info!("wrote {} Laplacians to {}", sample.len(), args.out.display());
    let json = envelope(
        "ingest",
        config,
        json!({
            "m": sample.dim(),
            "span": args.span,
            "documents": sample.ids(),
            "excluded": corpus.excluded,
            "out": args.out,
        }),
    );
    Ok(Report { json, table })
}

pub fn dist(args: &DistArgs, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let d = distance_matrix(&sample, config)?;
    let ids = sample.ids().to_vec();
    let mut table = Table::new(std::iter::once("label".to_string()).chain(ids.iter().cloned()));
    for (i, id) in ids.iter().enumerate() {
        table.push(
            std::iter::once(id.clone())
                .chain(d.row(i).iter().map(|v| num(*v)))
                .collect(),
        );
    }
    let rows: Vec<Vec<f64>> = d.row_iter().map(|r| r.iter().copied().collect()).collect();
    let json = envelope("dist", config, json!({ "labels": ids, "distances": rows }));
    Ok(Report { json, table })
}

pub fn mds(args: &MdsArgs, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let d = distance_matrix(&sample, config)?;
    let result = classical_mds(&d, args.dims)?;
    let header = std::iter::once("label".to_string()).chain((1..=args.dims).map(|k| format!("mds{k}")));
    let mut table = Table::new(header);
    let mut coords = Vec::new();
    for (i, id) in sample.ids().iter().enumerate() {
        let row: Vec<f64> = result.coordinates.row(i).iter().copied().collect();
        table.push(std::iter::once(id.clone()).chain(row.iter().map(|v| num(*v))).collect());
        coords.push(json!({ "label": id, "coordinates": row }));
    }
    let json = envelope(
        "mds",
        config,
        json!({ "coordinates": coords, "eigenvalues": result.eigenvalues }),
    );
    Ok(Report { json, table })
}

pub fn cluster(args: &ClusterArgs, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let d = distance_matrix(&sample, config)?;
    let variant: WardVariant = args.ward.into();
    let tree = ward_clustering(&d, variant)?;
    let assignments = args.cut.map(|k| tree.cut(k)).transpose()?;
    let table = match &assignments {
        Some(labels) => {
            let mut t = Table::new(["label", "cluster"]);
            for (id, c) in sample.ids().iter().zip(labels) {
                t.push(vec![id.clone(), (c + 1).to_string()]);
            }
            t
        }
        None => {
            let mut t = Table::new(["step", "left", "right", "height", "size"]);
            for (s, m) in tree.merges.iter().enumerate() {
                t.push(vec![
                    (s + 1).to_string(),
                    m.left.to_string(),
                    m.right.to_string(),
                    num(m.height),
                    m.size.to_string(),
                ]);
            }
            t
        }
    };
    let json = envelope(
        "cluster",
        config,
        json!({
            "ward": variant,
            "labels": sample.ids(),
            "merges": tree.merges,
            "clusters": assignments.map(|a| a.iter().map(|c| c + 1).collect::<Vec<_>>()),
        }),
    );
    Ok(Report { json, table })
}

pub fn mean(args: &MeanArgs, config: &AnalysisConfig) -> Result<Report> {
    let mut sample = load_sample(&args.manifest)?;
    if let Some(group) = &args.group {
        let indices: Vec<usize> = sample
            .groups()
            .unwrap_or_default()
            .iter()
            .enumerate()
            .filter(|(_, g)| *g == group)
            .map(|(k, _)| k)
            .collect();
        if indices.is_empty() {
            bail!(netmanifold::Error::InvalidParameter(format!(
                "no observations in group {group:?}"
            )));
        }
        sample = sample.subset(&indices)?;
    }
    let result = sample_mean(&sample, config)?;
    write_laplacian(&args.out, &result.mu_hat)?;
    let mut table = Table::new(["field", "value"]);
    table.push(vec!["n".into(), sample.len().to_string()]);
    table.push(vec!["m".into(), sample.dim().to_string()]);
    table.push(vec!["trace".into(), num(result.mu_hat.trace())]);
    table.push(vec!["out".into(), args.out.display().to_string()]);
    if let Some(gpa) = result.gpa {
        table.push(vec!["gpa_iterations".into(), gpa.iterations.to_string()]);
        table.push(vec!["gpa_converged".into(), gpa.converged.to_string()]);
    }
    let json = envelope(
        "mean",
        config,
        json!({
            "n": sample.len(),
            "m": sample.dim(),
            "trace": result.mu_hat.trace(),
            "gpa": result.gpa,
            "out": args.out,
        }),
    );
    Ok(Report { json, table })
}

pub fn interpolate(args: &InterpolateArgs, config: &AnalysisConfig) -> Result<Report> {
    let l1 = read_laplacian(&args.from)?;
    let l2 = read_laplacian(&args.to)?;
    let path = interpolation_path(&l1, &l2, &args.c, config)?;
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut table = Table::new(["c", "file"]);
    let mut files = Vec::new();
    for (k, (c, l)) in args.c.iter().zip(&path).enumerate() {
        let file = format!("{}_{}_c{}.csv", args.prefix, k + 1, num(*c));
        write_laplacian(&args.out_dir.join(&file), l)?;
        table.push(vec![num(*c), file.clone()]);
        files.push(json!({ "c": c, "file": file }));
    }
    let json = envelope(
        "interpolate",
        config,
        json!({ "points": files, "out_dir": args.out_dir }),
    );
    Ok(Report { json, table })
}

pub fn pca(args: &PcaArgs, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let result = tangent_pca(&sample, config)?;
    let ratios = result.explained_ratio();
    let mut table = Table::new(["component", "eigenvalue", "explained", "cumulative"]);
    let mut cumulative = 0.0;
    for (j, (lambda, ratio)) in result.eigenvalues.iter().zip(&ratios).enumerate() {
        cumulative += ratio;
        table.push(vec![(j + 1).to_string(), num(*lambda), num(*ratio), num(cumulative)]);
    }
    let r = result.rank();
    if let Some(path) = &args.scores {
        let header = std::iter::once("label".to_string()).chain((1..=r).map(|j| format!("s{j}")));
        let mut scores = Table::new(header);
        for (k, id) in sample.ids().iter().enumerate() {
            scores.push(
                std::iter::once(id.clone())
                    .chain(result.scores.row(k).iter().map(|v| num(*v)))
                    .collect(),
            );
        }
        write_text(path, &scores.render())?;
    }
    if let Some(path) = &args.importance {
        let weights = word_importance(&result, args.component)?;
        let words = node_labels(&sample);
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[b].abs().total_cmp(&weights[a].abs()).then(a.cmp(&b)));
        let mut importance = Table::new(["word", "importance", "sign"]);
        for i in order {
            let sign = if weights[i] < 0.0 { "-" } else { "+" };
            importance.push(vec![words[i].clone(), num(weights[i].abs()), sign.into()]);
        }
        write_text(path, &importance.render())?;
    }
    let json = envelope(
        "pca",
        config,
        json!({
            "n": sample.len(),
            "rank": r,
            "eigenvalues": result.eigenvalues,
            "explained": ratios,
            "total_variance": result.total_variance,
            "scores": args.scores,
            "importance": args.importance,
        }),
    );
    Ok(Report { json, table })
}

pub fn regress(args: &RegressArgs, config: &AnalysisConfig) -> Result<Report> {
    let loaded = load_sample(&args.manifest)?;
    let names = loaded.covariate_names().to_vec();
    let chosen: Vec<String> = if args.covariate.is_empty() {
        names.clone()
    } else {
        args.covariate.clone()
    };
    let mut columns = Vec::new();
    for c in &chosen {
        let idx = names.iter().position(|n| n == c).ok_or_else(|| {
            netmanifold::Error::InvalidParameter(format!("unknown covariate {c:?}; have {}", names.join(", ")))
        })?;
        columns.push(idx);
    }
    let rows: Vec<Vec<f64>> = loaded
        .covariates()
        .unwrap_or_default()
        .iter()
        .map(|row| columns.iter().map(|&i| row[i]).collect())
        .collect();
    let sample = loaded.clone().with_covariates(chosen.clone(), rows.clone())?;
    let model: VarianceModel = args.model.into();
    let fitted = fit(&sample, config, model)?;
    if fitted.underdetermined() {
        warn!(
            "{} observations for {} tangent coordinates: the chi-square reference is unreliable",
            sample.len(),
            fitted.dim()
        );
    }

    let mut table = Table::new(["term", "coefficient_norm", "statistic", "df", "p_value"]);
    table.push(vec![
        "intercept".into(),
        num(fitted.coefficients.row(0).norm()),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let mut terms = vec![json!({ "term": "intercept", "coefficient_norm": fitted.coefficients.row(0).norm() })];
    for (w, name) in chosen.iter().enumerate() {
        let lrt = lrt_covariate(&sample, config, w, model)?;
        let norm = fitted.coefficients.row(w + 1).norm();
        table.push(vec![
            name.clone(),
            num(norm),
            num(lrt.statistic),
            lrt.df.to_string(),
            num(lrt.p_value),
        ]);
        terms.push(json!({ "term": name, "coefficient_norm": norm, "lrt": lrt }));
    }

    if let Some(path) = &args.path_out {
        write_text(path, &fitted_path(&sample, &fitted, &rows, args, config)?.render())?;
    }
    let json = envelope(
        "regress",
        config,
        json!({
            "n": sample.len(),
            "dim": fitted.dim(),
            "model": model,
            "underdetermined": fitted.underdetermined(),
            "terms": terms,
            "fitted_path": args.path_out,
        }),
    );
    Ok(Report { json, table })
}

/// Predicted Laplacians along the first covariate's observed range (others
/// held at their means), expressed as scores on the sample's principal
/// components.
fn fitted_path(
    sample: &NetworkSample,
    fitted: &netmanifold::RegressionFit,
    rows: &[Vec<f64>],
    args: &RegressArgs,
    config: &AnalysisConfig,
) -> Result<Table> {
    if args.steps < 2 {
        bail!(netmanifold::Error::InvalidParameter(
            "--steps must be at least 2".into()
        ));
    }
    let pca = tangent_pca(sample, config)?;
    let k = args.components.min(pca.rank());
    let u = rows[0].len();
    let means: Vec<f64> = (0..u)
        .map(|w| rows.iter().map(|r| r[w]).sum::<f64>() / rows.len() as f64)
        .collect();
    let lo = rows.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r[0]).fold(f64::NEG_INFINITY, f64::max);
    let name = sample.covariate_names()[0].clone();
    let mut table = Table::new(std::iter::once(name).chain((1..=k).map(|j| format!("pc{j}"))));
    let mut projector = Projector::new(config.qp);
    for s in 0..args.steps {
        let mut t = means.clone();
        t[0] = lo + (hi - lo) * s as f64 / (args.steps - 1) as f64;
        let l = predict(fitted, &t, config, &mut projector)?;
        let point = f_alpha(&l, config.alpha)?;
        let coords = to_tangent(&point, &pca.pole, config.geometry)?.into_coords();
        let scores = pca.project_scores(&coords)?;
        table.push(
            std::iter::once(num(t[0]))
                .chain(scores.iter().take(k).map(|v| num(*v)))
                .collect(),
        );
    }
    Ok(table)
}

pub fn test2(args: &Test2Args, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let (a, b, names) = two_groups(&sample, &args.groups)?;
    let result = match args.method.into() {
        TestMethod::Permutation => permutation_test(&a, &b, config, args.r)?,
        TestMethod::Asymptotic => asymptotic_test(&a, &b, config, args.draws)?,
    };
    let mut table = Table::new(["field", "value"]);
    table.push(vec!["group_a".into(), names[0].clone()]);
    table.push(vec!["group_b".into(), names[1].clone()]);
    table.push(vec!["method".into(), format!("{:?}", result.method).to_lowercase()]);
    table.push(vec!["statistic".into(), num(result.statistic)]);
    if let Some(scaled) = result.scaled_statistic {
        table.push(vec!["scaled_statistic".into(), num(scaled)]);
    }
    table.push(vec!["p_value".into(), num(result.p_value)]);
    table.push(vec!["n_a".into(), result.n_a.to_string()]);
    table.push(vec!["n_b".into(), result.n_b.to_string()]);
    let mut value = serde_json::to_value(&result)?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("groups".into(), json!(names));
        obj.insert("T".into(), json!(result.statistic));
        obj.insert("p".into(), json!(result.p_value));
    }
    Ok(Report {
        json: envelope("test2", config, value),
        table,
    })
}

pub fn edges(args: &EdgesArgs, config: &AnalysisConfig) -> Result<Report> {
    let sample = load_sample(&args.manifest)?;
    let (a, b, names) = two_groups(&sample, &args.groups)?;
    let offset = match args.offset.as_deref() {
        None | Some("median") => OffsetPolicy::MedianSp,
        Some(v) => OffsetPolicy::Fixed(v.parse().map_err(|_| {
            netmanifold::Error::InvalidParameter(format!("--offset expects 'median' or a number, got {v:?}"))
        })?),
    };
    let params = EdgeZParams {
        beta: args.beta,
        n_ref: args.n_ref,
        offset,
    };
    let result = edge_z_table(&a, &b, &params)?;
    let rows = result.top(args.top);
    let mut table = Table::new(["word_i", "word_j", "mean_a", "mean_b", "s_p", "z"]).tab_separated();
    for e in rows {
        table.push(vec![
            e.label_i.clone(),
            e.label_j.clone(),
            num(e.mean_a),
            num(e.mean_b),
            num(e.s_p),
            num(e.z),
        ]);
    }
    let json = envelope(
        "edges",
        config,
        json!({
            "groups": names,
            "beta": result.beta,
            "n_ref": result.n_ref,
            "q": result.q,
            "retained": result.rows.len(),
            "edges": rows,
        }),
    );
    Ok(Report { json, table })
}
