//! Prints the leaky chain rule file: `cargo run --example gen_leaky -- 30`.

fn main() {
    let k = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("k must be a number"))
        .unwrap_or(30);
    print!("{}", desimone::corpus::leaky_chain(k));
}
