//! Wire messages and their canonical payload encodings.
//!
//! Each payload is the length-prefixed field list of [`crate::encoding`];
//! those exact bytes are what travels, what gets signed or MAC'd, and
//! what the eavesdropper records. Group elements and scalars are encoded
//! fixed-width (left-padded to the modulus width) so message sizes are
//! data-independent.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crypto::ae::NONCE_LEN;
use crate::crypto::{AggregateSignature, Ciphertext, MacTag, Signature};
use crate::encoding::{CodecError, Decoder, Encoder};
use crate::group::{GroupElement, GroupParams};

use super::ProtocolAbort;

/// Who sent or should receive a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Party {
    User(u64),
    Server,
    /// Delivery to every user participating in the current round.
    Broadcast,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::User(id) => write!(f, "user:{id}"),
            Party::Server => write!(f, "server"),
            Party::Broadcast => write!(f, "broadcast"),
        }
    }
}

impl FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "server" => Ok(Party::Server),
            "broadcast" => Ok(Party::Broadcast),
            other => other
                .strip_prefix("user:")
                .and_then(|id| id.parse().ok())
                .map(Party::User)
                .ok_or_else(|| format!("unknown party {other:?}")),
        }
    }
}

impl Serialize for Party {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsgType {
    /// Setup round 1, user to server: signed key-agreement public key.
    KeyAnnounce,
    /// Setup round 1, server to each member: the collected key list plus
    /// the server's own key-agreement key.
    KeyList,
    /// Setup round 2, user to server: encrypted shares for every peer.
    EncShares,
    /// Setup round 2, server to each member: the shares addressed to it.
    ShareDelivery,
    /// Aggregation round 1, user to server: the masked update vector.
    MaskedUpdate,
    /// Aggregation round 1, server to members: the online set.
    OnlineSet,
    /// Aggregation round 2, user to server: signature over the online set.
    SetSignature,
    /// Aggregation round 2, server to members: all valid set signatures.
    SignatureBundle,
    /// Aggregation round 2, server to members: one aggregated signature.
    AggregateSig,
    /// Aggregation round 3, user to server: reconstruction share in the
    /// exponent.
    ZetaShare,
}

impl MsgType {
    pub fn as_str(&self) -> &'static str {
        match self {
            MsgType::KeyAnnounce => "key_announce",
            MsgType::KeyList => "key_list",
            MsgType::EncShares => "enc_shares",
            MsgType::ShareDelivery => "share_delivery",
            MsgType::MaskedUpdate => "masked_update",
            MsgType::OnlineSet => "online_set",
            MsgType::SetSignature => "set_signature",
            MsgType::SignatureBundle => "signature_bundle",
            MsgType::AggregateSig => "aggregate_sig",
            MsgType::ZetaShare => "zeta_share",
        }
    }
}

/// One wire message. `k` is 0 during setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundMessage {
    pub k: u64,
    pub round: u8,
    pub sender: Party,
    pub receiver: Party,
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
    pub mac: Option<MacTag>,
}

impl RoundMessage {
    /// Bytes the message occupies on the wire: payload plus MAC tag.
    pub fn wire_size(&self) -> usize {
        self.payload.len() + self.mac.as_ref().map_or(0, |m| m.as_bytes().len())
    }
}

fn malformed(what: &'static str) -> impl Fn(CodecError) -> ProtocolAbort {
    move |_| ProtocolAbort::Malformed(what)
}

/// Bytes a user signs over its announced key: `(user, pk)`.
pub fn key_sign_bytes(user: u64, pk: &GroupElement) -> Vec<u8> {
    let aux = crate::crypto::aux_group();
    let mut enc = Encoder::new();
    enc.u64(user).bytes(&pk.to_bytes_padded(aux));
    enc.finish()
}

/// AE context binding a share ciphertext to its protocol position.
pub fn share_context(sender: u64, receiver: u64) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.bytes(b"share").u64(sender).u64(receiver).u64(0).u64(2);
    enc.finish()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyAnnounce {
    pub user: u64,
    pub pk: GroupElement,
    pub sig: Signature,
}

impl KeyAnnounce {
    pub fn encode(&self) -> Vec<u8> {
        let aux = crate::crypto::aux_group();
        let mut enc = Encoder::new();
        enc.u64(self.user)
            .bytes(&self.pk.to_bytes_padded(aux))
            .bytes(&self.sig.encode());
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let aux = crate::crypto::aux_group();
        let err = malformed("key_announce");
        let mut dec = Decoder::new(bytes);
        let user = dec.u64().map_err(&err)?;
        let pk = aux
            .element_from_bytes(dec.fixed(aux.element_width()).map_err(&err)?)
            .map_err(|_| ProtocolAbort::Malformed("key_announce"))?;
        let sig = Signature::decode(dec.bytes().map_err(&err)?).map_err(&err)?;
        dec.expect_end().map_err(&err)?;
        Ok(KeyAnnounce { user, pk, sig })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyList {
    pub server_pk: GroupElement,
    /// `(user, pk, sig)` entries, ascending by user id.
    pub entries: Vec<KeyAnnounce>,
}

impl KeyList {
    pub fn encode(&self) -> Vec<u8> {
        let aux = crate::crypto::aux_group();
        let mut enc = Encoder::new();
        enc.bytes(&self.server_pk.to_bytes_padded(aux));
        enc.u64(self.entries.len() as u64);
        for e in &self.entries {
            enc.u64(e.user)
                .bytes(&e.pk.to_bytes_padded(aux))
                .bytes(&e.sig.encode());
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let aux = crate::crypto::aux_group();
        let err = malformed("key_list");
        let mut dec = Decoder::new(bytes);
        let server_pk = aux
            .element_from_bytes(dec.fixed(aux.element_width()).map_err(&err)?)
            .map_err(|_| ProtocolAbort::Malformed("key_list"))?;
        let count = dec.u64().map_err(&err)?;
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let user = dec.u64().map_err(&err)?;
            let pk = aux
                .element_from_bytes(dec.fixed(aux.element_width()).map_err(&err)?)
                .map_err(|_| ProtocolAbort::Malformed("key_list"))?;
            let sig = Signature::decode(dec.bytes().map_err(&err)?).map_err(&err)?;
            entries.push(KeyAnnounce { user, pk, sig });
        }
        dec.expect_end().map_err(&err)?;
        Ok(KeyList { server_pk, entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncShares {
    pub sender: u64,
    /// `(receiver, ciphertext)` pairs, ascending by receiver.
    pub shares: Vec<(u64, Ciphertext)>,
}

impl EncShares {
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.sender).u64(self.shares.len() as u64);
        for (rcv, ct) in &self.shares {
            enc.u64(*rcv).bytes(&ct.nonce).bytes(&ct.body);
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("enc_shares");
        let mut dec = Decoder::new(bytes);
        let sender = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut shares = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let rcv = dec.u64().map_err(&err)?;
            let nonce: [u8; NONCE_LEN] = dec
                .fixed(NONCE_LEN)
                .map_err(&err)?
                .try_into()
                .expect("fixed width checked");
            let body = dec.bytes().map_err(&err)?.to_vec();
            shares.push((rcv, Ciphertext { nonce, body }));
        }
        dec.expect_end().map_err(&err)?;
        Ok(EncShares { sender, shares })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareDelivery {
    pub receiver: u64,
    /// `(sender, ciphertext)` pairs, ascending by sender.
    pub shares: Vec<(u64, Ciphertext)>,
}

impl ShareDelivery {
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.receiver).u64(self.shares.len() as u64);
        for (snd, ct) in &self.shares {
            enc.u64(*snd).bytes(&ct.nonce).bytes(&ct.body);
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("share_delivery");
        let mut dec = Decoder::new(bytes);
        let receiver = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut shares = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let snd = dec.u64().map_err(&err)?;
            let nonce: [u8; NONCE_LEN] = dec
                .fixed(NONCE_LEN)
                .map_err(&err)?
                .try_into()
                .expect("fixed width checked");
            let body = dec.bytes().map_err(&err)?.to_vec();
            shares.push((snd, Ciphertext { nonce, body }));
        }
        dec.expect_end().map_err(&err)?;
        Ok(ShareDelivery { receiver, shares })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedUpdate {
    pub user: u64,
    pub k: u64,
    pub elements: Vec<GroupElement>,
}

impl MaskedUpdate {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.user).u64(self.k).u64(self.elements.len() as u64);
        for e in &self.elements {
            enc.bytes(&e.to_bytes_padded(params));
        }
        enc.finish()
    }

    /// Accepts any element in `[1, p-1]`; subgroup membership is not
    /// checked here, because what arrives on the wire is exactly what a
    /// tamperer may have produced.
    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, ProtocolAbort> {
        let err = malformed("masked_update");
        let mut dec = Decoder::new(bytes);
        let user = dec.u64().map_err(&err)?;
        let k = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut elements = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let raw = dec.fixed(params.element_width()).map_err(&err)?;
            let e = params
                .element_from_bytes(raw)
                .map_err(|_| ProtocolAbort::Malformed("masked_update"))?;
            elements.push(e);
        }
        dec.expect_end().map_err(&err)?;
        Ok(MaskedUpdate { user, k, elements })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnlineSet {
    pub k: u64,
    pub members: BTreeSet<u64>,
}

impl OnlineSet {
    /// Canonical bytes; also the signing input for the round-2 check.
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.k).u64(self.members.len() as u64);
        for id in &self.members {
            enc.u64(*id);
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("online_set");
        let mut dec = Decoder::new(bytes);
        let k = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut members = BTreeSet::new();
        for _ in 0..count {
            members.insert(dec.u64().map_err(&err)?);
        }
        dec.expect_end().map_err(&err)?;
        if members.len() != count as usize {
            return Err(ProtocolAbort::Malformed("online_set"));
        }
        Ok(OnlineSet { k, members })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSignature {
    pub user: u64,
    pub k: u64,
    pub sig: Signature,
}

impl SetSignature {
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.user).u64(self.k).bytes(&self.sig.encode());
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("set_signature");
        let mut dec = Decoder::new(bytes);
        let user = dec.u64().map_err(&err)?;
        let k = dec.u64().map_err(&err)?;
        let sig = Signature::decode(dec.bytes().map_err(&err)?).map_err(&err)?;
        dec.expect_end().map_err(&err)?;
        Ok(SetSignature { user, k, sig })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureBundle {
    pub k: u64,
    /// `(signer, signature)` entries, ascending by signer.
    pub entries: Vec<(u64, Signature)>,
}

impl SignatureBundle {
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.k).u64(self.entries.len() as u64);
        for (id, sig) in &self.entries {
            enc.u64(*id).bytes(&sig.encode());
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("signature_bundle");
        let mut dec = Decoder::new(bytes);
        let k = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let id = dec.u64().map_err(&err)?;
            let sig = Signature::decode(dec.bytes().map_err(&err)?).map_err(&err)?;
            entries.push((id, sig));
        }
        dec.expect_end().map_err(&err)?;
        Ok(SignatureBundle { k, entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateSig {
    pub k: u64,
    pub signers: Vec<u64>,
    pub asig: AggregateSignature,
}

impl AggregateSig {
    pub fn encode(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.k).u64(self.signers.len() as u64);
        for id in &self.signers {
            enc.u64(*id);
        }
        enc.bytes(&self.asig.encode());
        enc.finish()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolAbort> {
        let err = malformed("aggregate_sig");
        let mut dec = Decoder::new(bytes);
        let k = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut signers = Vec::with_capacity(count as usize);
        for _ in 0..count {
            signers.push(dec.u64().map_err(&err)?);
        }
        let asig = AggregateSignature::decode(dec.bytes().map_err(&err)?).map_err(&err)?;
        dec.expect_end().map_err(&err)?;
        Ok(AggregateSig { k, signers, asig })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaShare {
    pub user: u64,
    pub k: u64,
    pub elements: Vec<GroupElement>,
}

impl ZetaShare {
    pub fn encode(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new();
        enc.u64(self.user).u64(self.k).u64(self.elements.len() as u64);
        for e in &self.elements {
            enc.bytes(&e.to_bytes_padded(params));
        }
        enc.finish()
    }

    pub fn decode(bytes: &[u8], params: &GroupParams) -> Result<Self, ProtocolAbort> {
        let err = malformed("zeta_share");
        let mut dec = Decoder::new(bytes);
        let user = dec.u64().map_err(&err)?;
        let k = dec.u64().map_err(&err)?;
        let count = dec.u64().map_err(&err)?;
        let mut elements = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let raw = dec.fixed(params.element_width()).map_err(&err)?;
            let e = params
                .element_from_bytes(raw)
                .map_err(|_| ProtocolAbort::Malformed("zeta_share"))?;
            elements.push(e);
        }
        dec.expect_end().map_err(&err)?;
        Ok(ZetaShare { user, k, elements })
    }
}

/// Plaintext bundle of share scalars carried inside one ciphertext,
/// laid out iteration-major.
pub fn encode_share_bundle(values: &[crate::group::Scalar], q: &num_bigint::BigUint) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.u64(values.len() as u64);
    for v in values {
        enc.bytes(&v.to_bytes_padded(q));
    }
    enc.finish()
}

pub fn decode_share_bundle(
    bytes: &[u8],
    expected: usize,
    params: &GroupParams,
) -> Option<Vec<crate::group::Scalar>> {
    let mut dec = Decoder::new(bytes);
    let count = dec.u64().ok()?;
    if count as usize != expected {
        return None;
    }
    let mut out = Vec::with_capacity(expected);
    for _ in 0..expected {
        out.push(params.scalar_from_bytes(dec.fixed(params.scalar_width()).ok()?));
    }
    dec.expect_end().ok()?;
    Some(out)
}
