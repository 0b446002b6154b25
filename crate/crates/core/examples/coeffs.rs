//! Print the default coefficients and the derived rates.
fn main() -> qsr::Result<()> {
    let k = qsr::BathKernel::standard();
    let d = k.d_coefficients()?;
    for m in [1, 0, -1] {
        println!("d_{m:+} = {:.9}", d.get(m)?);
    }
    println!("Im d1 - Im d-1 = {:.9}", d.lamb_shift());
    Ok(())
}
