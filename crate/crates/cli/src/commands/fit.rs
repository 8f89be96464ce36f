use mfnow_core::midas::{fit, MidasModel};
use mfnow_core::Result;

use crate::config::load_config;
use crate::ingest::load_dataset;
use crate::output::{fmt_sig, render_table, OutputPlan};
use crate::FitArgs;

pub fn run(args: &FitArgs) -> Result<()> {
    let config = load_config(&args.common.config)?;
    let plan = OutputPlan::from_config(
        &config,
        args.common.out.as_deref(),
        args.common.format.as_deref(),
    )?;
    let dataset = load_dataset(&config)?;
    let spec = config.midas_spec()?;

    let model = fit(&dataset.target, &dataset.exogenous, &spec)?;

    plan.ensure_directory()?;
    plan.write_json("model.json", &model)?;
    plan.write_csv("coefficients.csv", &coefficients_csv(&model))?;
    let text = render_text(&model);
    plan.write_text("fit.txt", &text)?;
    print!("{text}");
    Ok(())
}

pub fn coefficients_csv(model: &MidasModel) -> String {
    let mut body =
        String::from("term,coefficient,std_error,t_statistic,p_value,conf_low,conf_high\n");
    for (i, name) in model.column_names.iter().enumerate() {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            name,
            model.coefficients[i],
            model.std_errors[i],
            model.t_statistics[i],
            model.p_values[i],
            model.conf_low[i],
            model.conf_high[i]
        ));
    }
    body
}

pub fn render_text(model: &MidasModel) -> String {
    let mut out = format!("mixed-frequency regression for {}\n", model.target_name);

    let rows: Vec<Vec<String>> = model
        .column_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            vec![
                name.clone(),
                fmt_sig(model.coefficients[i]),
                fmt_sig(model.std_errors[i]),
                fmt_sig(model.t_statistics[i]),
                fmt_sig(model.p_values[i]),
                fmt_sig(model.conf_low[i]),
                fmt_sig(model.conf_high[i]),
            ]
        })
        .collect();
    out.push_str(&render_table(
        &[
            "term",
            "coefficient",
            "std error",
            "t",
            "P>|t|",
            "[0.025",
            "0.975]",
        ],
        &rows,
    ));

    if !model.theta.is_empty() {
        out.push_str("\nestimated lag-weight parameters\n");
        let rows: Vec<Vec<String>> = model
            .theta
            .iter()
            .map(|(name, params)| {
                let rendered = if params.is_empty() {
                    "(none)".to_string()
                } else {
                    params
                        .iter()
                        .map(|p| fmt_sig(*p))
                        .collect::<Vec<_>>()
                        .join(", ")
                };
                vec![name.clone(), rendered]
            })
            .collect();
        out.push_str(&render_table(&["term", "theta"], &rows));
    }

    out.push_str(&format!(
        "\nobservations {}  parameters {}  R-squared {}  adjusted {}\n",
        model.n_obs,
        model.n_params,
        fmt_sig(model.r_squared),
        fmt_sig(model.adj_r_squared)
    ));
    out.push_str(&format!(
        "residual sum of squares {}  residual variance {}\n",
        fmt_sig(model.rss),
        fmt_sig(model.sigma2)
    ));
    out.push_str(&format!(
        "weight search: {} starts ({} failed), {} objective evaluations\n",
        model.fit.starts, model.fit.failed_starts, model.fit.objective_evaluations
    ));
    out
}
