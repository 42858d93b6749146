fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LONGSENT_LOG", "info"))
        .format_timestamp(None)
        .init();
    std::process::exit(longsent::cli::dispatch(std::env::args_os()));
}
