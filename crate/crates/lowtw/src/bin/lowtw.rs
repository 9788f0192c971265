fn main() {
    // behave like a well-mannered batch tool when the consumer closes the
    // pipe early (e.g. `lowtw ... | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(lowtw::io::cli_main());
}
