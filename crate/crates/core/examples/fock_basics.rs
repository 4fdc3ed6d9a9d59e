//! Two photons on a 50:50 splitter: the |1,1⟩ output vanishes.
//!
//! ```bash
//! cargo run --example fock_basics
//! ```

use swapsim::fock::{FockState, ModeId, ModeRegister, Path};
use swapsim::optics::beam_splitter;

fn main() -> swapsim::Result<()> {
    let (c, d) = (ModeId::h(Path::C), ModeId::h(Path::D));
    let register = ModeRegister::new([c, d])?;
    let input = FockState::from_sparse_terms(register, [([(c, 1u8), (d, 1u8)].as_slice(), 1.0.into())])?;
    let output = input.apply_transform(&beam_splitter(c, d, 0.5)?)?;
    for (occ, amp) in output.sorted_terms() {
        println!("{occ:?}  {amp:.4}  p = {:.4}", amp.norm_sqr());
    }
    println!("coincidence amplitude: {:.1e}", output.amplitude_of(&[(c, 1), (d, 1)])?.norm());
    println!("norm: {:.12}", output.norm_sqr());
    Ok(())
}
