use clap::Parser;
use nvgeom_cli::args::{resolve, Cli, Command};
use nvgeom_cli::{commands, validate};

/// Exit codes: 0 success, 1 runtime/criteria failure, 2 invalid
/// configuration, 3 proximity failure in the Monte-Carlo engine.
fn main() {
    let cli = Cli::parse();

    if let Command::Validate { only } = &cli.command {
        let ids: Vec<usize> = match only
            .as_deref()
            .map(|list| list.split(',').map(|t| t.trim().parse::<usize>()).collect())
            .transpose()
        {
            Ok(ids) => ids.unwrap_or_default(),
            Err(e) => {
                eprintln!("config error: bad --only list: {e}");
                std::process::exit(2);
            }
        };
        let threads = cli.threads.unwrap_or(0);
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool,
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(1);
            }
        };
        let reports = pool.install(|| validate::run_selected(&ids));
        let failed = reports.iter().filter(|r| !r.passed).count();
        println!(
            "{} of {} criteria passed{}",
            reports.len() - failed,
            reports.len(),
            if failed > 0 { " -- FAILURES ABOVE" } else { "" }
        );
        std::process::exit(if failed > 0 { 1 } else { 0 });
    }

    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e:#}");
            std::process::exit(2);
        }
    };

    match commands::execute(&cfg) {
        Ok(execution) => {
            execution.print_stdout();
            if let Some(base) = &cfg.output {
                match execution.write_files(base) {
                    Ok(paths) => {
                        for p in paths {
                            println!("wrote {}", p.display());
                        }
                    }
                    Err(e) => {
                        eprintln!("error writing outputs: {e}");
                        std::process::exit(1);
                    }
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code_for(&e));
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(core_err) = cause.downcast_ref::<nvgeom::Error>() {
            return match core_err {
                nvgeom::Error::Proximity { .. } => 3,
                _ => 2,
            };
        }
    }
    1
}
