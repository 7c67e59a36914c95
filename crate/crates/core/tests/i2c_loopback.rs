mod support;

use passmod_core::i2c::{resolve_bus, Drive};
use passmod_core::Level;
use proptest::prelude::*;
use support::i2c_model::{loopback, LoopbackReport};

#[test]
fn ten_thousand_random_transactions() {
    let r = loopback(7, 10_000);
    assert_eq!(
        r,
        LoopbackReport {
            transactions: 10_000,
            ..Default::default()
        }
    );
}

proptest! {
    #[test]
    fn wired_and_is_logical_and(levels in prop::collection::vec(any::<bool>(), 0..16)) {
        let drives = levels.iter().map(|&h| if h { Drive::Release } else { Drive::PullLow });
        let want = if levels.iter().all(|&h| h) { Level::High } else { Level::Low };
        prop_assert_eq!(resolve_bus(drives), want);
    }
}
