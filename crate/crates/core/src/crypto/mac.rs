//! HMAC-SHA256 tags for authenticating masked updates.

use hmac::{Hmac, KeyInit, Mac};
use sha2::Sha256;

use super::SharedKey;

type HmacSha256 = Hmac<Sha256>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacTag(pub [u8; 32]);

impl MacTag {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<MacTag> {
        bytes.try_into().ok().map(MacTag)
    }
}

pub fn mac_tag(key: &SharedKey, msg: &[u8]) -> MacTag {
    let mut mac = HmacSha256::new_from_slice(key.as_bytes()).expect("any key length works");
    mac.update(msg);
    MacTag(mac.finalize().into_bytes().into())
}

pub fn mac_verify(key: &SharedKey, msg: &[u8], tag: &MacTag) -> bool {
    let mut mac = HmacSha256::new_from_slice(key.as_bytes()).expect("any key length works");
    mac.update(msg);
    mac.verify_slice(&tag.0).is_ok()
}
