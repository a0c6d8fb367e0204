use std::process::ExitCode;

fn configure_threads() {
    let Some(n) = std::env::var("LFT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) else {
        return;
    };
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let result = lft_cli::parse_args(std::env::args_os()).and_then(|cfg| lft_cli::run(&cfg));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(lft_cli::CliError::Usage(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("lft: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
