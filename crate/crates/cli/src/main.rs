use clap::Parser;

fn main() -> anyhow::Result<()> {
    let cli = hbern_cli::Cli::parse();
    hbern_cli::init_threads()?;
    let code = hbern_cli::run(&cli)?;
    std::process::exit(code);
}
