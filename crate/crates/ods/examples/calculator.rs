//! The calculate tool: exact rational arithmetic and the unit-conversion
//! table, all local.
//!
//! Run: `cargo run --example calculator`

use ods::toolbox::Calculator;

fn main() {
    let calc = Calculator::local_only();
    let inputs = [
        "2014-1924",
        "1982-1980",
        "(3+4)*2",
        "1,127 - 283",
        "22/7",
        "1/3",
        "1/0",
        "112 inches to millimeters",
        "2.5 inches to mm",
        "72 F to C",
        "26.2 miles to km",
        "integrate x^2",
    ];
    for input in inputs {
        let result = calc.calculate(input);
        println!(
            "{input:>28}  ->  {}  [route={}]",
            result.text,
            result.metadata.get("route").map(String::as_str).unwrap_or("?")
        );
    }
}
