fn main() {
    // die quietly when the consumer closes the pipe instead of panicking
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(myoeq::cli::run(std::env::args().collect()));
}
