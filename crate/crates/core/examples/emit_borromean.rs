use pirank_core::adjunction::{borromean_instance, write_instance};
use pirank_core::words::Alphabet;

fn main() {
    let inst = borromean_instance();
    print!("{}", write_instance(&inst, &Alphabet::canonical(2)));
}
