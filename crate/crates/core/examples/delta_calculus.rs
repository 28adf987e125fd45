//! Delta calculus basics: jump operators, graininess, derivative,
//! integral, and the exact calculus identities.

use deltavar::{GridFunction, Result, TimeScale};

fn main() -> Result<()> {
    // three ways to build a scale
    let uniform = TimeScale::uniform(0.0, 1.0, 4)?;
    let qscale = TimeScale::qscale(2.0, 0, 3)?;
    let irregular = TimeScale::from_points(vec![0.0, 0.1, 0.4, 1.0])?;

    println!("uniform(0,1,4):    {:?}", uniform.points());
    println!("qscale(2,0,3):     {:?}", qscale.points());
    println!("irregular:         {:?}", irregular.points());

    // jump operators and graininess on the q-scale 1, 2, 4, 8
    for k in 0..qscale.len() {
        let (_, sigma) = qscale.sigma(k)?;
        let (_, rho) = qscale.rho(k)?;
        let mu = qscale.mu(k)?;
        println!(
            "t = {:>3}: sigma = {sigma:>3}, rho = {rho:>3}, mu = {mu:>3}",
            qscale.points()[k]
        );
    }

    // delta derivative of t^2 is t + sigma(t), not 2t: the forward gap shows up
    let square = GridFunction::sample(&uniform, |t| t * t);
    let d = uniform.delta_derivative(&square)?;
    println!("\ndelta(t^2) on uniform h=0.25 (expect 2t + h):");
    for (k, &v) in d.values().iter().enumerate() {
        println!("  t = {:.2}: {v:.4}", uniform.points()[k]);
    }

    // the delta integral is the gap-weighted left sum; t over [1, 8] on
    // the q-scale: 1*1 + 2*2 + 4*4 = 21
    let id = GridFunction::sample(&qscale, |t| t);
    let integral = qscale.delta_integral(&id, 0, qscale.len() - 1)?;
    println!("\nintegral of t over qscale [1,8] = {integral}");

    // fundamental theorem: integrating the derivative telescopes exactly
    let f = GridFunction::sample(&irregular, |t| t.sin() + t * t);
    let df = irregular.delta_derivative(&f)?;
    let total = irregular.delta_integral(&df, 0, irregular.len() - 1)?;
    let jump = f.values()[irregular.len() - 1] - f.values()[0];
    println!("\nfundamental theorem: integral = {total:.16}, f(b) - f(a) = {jump:.16}");

    Ok(())
}
