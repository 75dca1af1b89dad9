fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COHAP_LOG", "warn")).init();
    std::process::exit(cohap::cli::main_with(std::env::args_os()));
}
