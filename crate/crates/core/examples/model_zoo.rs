//! Prints the layer table and parameter total of every model.

use emigrade::{build_model, ModelId};

fn main() -> emigrade::Result<()> {
    for id in ModelId::ALL {
        let spec = build_model(id.get())?;
        print!("{}", spec.summary());
        if let Some(quoted) = id.published_param_total() {
            if quoted != spec.param_count() {
                println!("(quoted total {quoted} differs from the computed one)");
            }
        }
        println!();
    }
    Ok(())
}
