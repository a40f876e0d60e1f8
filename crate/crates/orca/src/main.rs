use clap::Parser;

fn main() {
    let cli = orca::cli::Cli::parse();
    match orca::cli::run(&cli) {
        Ok(out) => {
            for l in &out.summary {
                println!("{l}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("orca: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
