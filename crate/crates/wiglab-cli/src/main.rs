fn main() {
    // Die quietly when stdout closes early (wiglab ... | head); the
    // runtime's default of ignoring SIGPIPE turns that into a panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(wiglab_cli::run());
}
