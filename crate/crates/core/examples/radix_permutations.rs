//! Mixed-radix codes for permutations and the transposition cascades that
//! realise them.

use meosim::perm::{hall_apply, hall_trace, radix_decode, radix_encode, radix_index, RadixCode};

fn main() -> meosim::error::Result<()> {
    let code = RadixCode::parse("002143")?;
    let sigma = radix_decode(&code);
    println!("code {code} -> {sigma} (index {} of 720)", radix_index(&code));
    for (step, list) in hall_trace(&code).iter().enumerate() {
        println!("  after block {}: {:?}", step + 1, list);
    }
    assert_eq!(hall_apply(&code), sigma);
    assert_eq!(radix_encode(&sigma), code);

    for idx in 1..=6 {
        let c = RadixCode::from_index(idx, 3)?;
        println!("sigma_{idx} = {c} -> {}", radix_decode(&c));
    }
    Ok(())
}
