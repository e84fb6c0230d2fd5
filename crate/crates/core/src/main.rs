use fdqc::cli::{main_with_args, Io};

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = main_with_args(
        std::env::args_os(),
        &mut Io {
            out: &mut out,
            err: &mut err,
        },
    );
    std::process::exit(code);
}
