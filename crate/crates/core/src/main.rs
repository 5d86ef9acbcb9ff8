fn main() {
    std::process::exit(gbm_core::app::run(std::env::args_os()));
}
