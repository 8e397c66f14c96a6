use clap::Parser;

fn main() {
    let cli = minep::cli::Cli::parse();
    match minep::cli::run(&cli) {
        Ok(out) => println!("{out}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
