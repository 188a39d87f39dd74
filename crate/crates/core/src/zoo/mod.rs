//! Named losses, surrogates and links.

pub mod abstain;
pub mod classic;
pub mod lovasz;
pub mod topk;

pub use abstain::{abstain_embedding, abstain_loss, abstain_surrogate, binary_code, AbstainLink, ABSTAIN};
pub use classic::{hinge, hinge_embedding, hinge_link, zero_one};
pub use lovasz::{hamming, SetFunction, SignLink};
pub use topk::{embedded_top2_loss, top_k_loss, top_k_surrogate, TopKLink};
