//! Joint acknowledgment encoding for massive random access.
//!
//! A base station that decodes K out of N potential transmitters must tell
//! them so in a single broadcast feedback message. This crate implements the
//! building blocks of that problem end to end:
//!
//! - [`codec`] — five feedback encoders/decoders, from exact enumerative
//!   coding down to near-optimal probabilistic schemes that admit a
//!   controlled false-positive fraction;
//! - [`bounds`] — information-theoretic limits on the message length and
//!   moment bounds for random user activity;
//! - [`arq`] — the L-round retransmission reliability model, downlink outage
//!   under Rayleigh fading and joint message-length optimization;
//! - [`sim`] — a reproducible Monte-Carlo engine that runs the real codecs
//!   inside the retransmission loop and validates every analytic formula;
//! - [`gf`] / [`hashing`] — the field arithmetic and hash families the
//!   probabilistic codecs are built on.

pub mod arq;
pub mod bounds;
pub mod codec;
pub mod gf;
pub mod hashing;
pub mod numeric;
pub mod sim;
