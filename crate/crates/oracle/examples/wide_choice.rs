//! Prints a wide-choice instance: `wide_choice WIDTH [DEPTH]`.

fn main() {
    let mut args = std::env::args().skip(1);
    let width = args.next().and_then(|w| w.parse().ok()).unwrap_or(4);
    let depth = args.next().and_then(|d| d.parse().ok()).unwrap_or(4);
    print!("{}", tohtn_oracle::wide_choice(width, depth));
}
