use qtensor::alloc::TrackingAllocator;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(qtensor::cli::run_cli(&argv));
}
