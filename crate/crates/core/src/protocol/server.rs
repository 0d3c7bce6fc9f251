//! The server-side state machine.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;

use crate::crypto::{
    ka_agree, ka_gen, mac_verify, msig_aggregate, verify, KeyPair, SharedKey, SigScheme, Signature,
};
use crate::group::{bounded_dlog_counted, exponent_recon, GroupElement, GroupError};

use super::config::{Mode, ProtocolConfig};
use super::messages::{
    key_sign_bytes, AggregateSig, EncShares, KeyAnnounce, KeyList, MaskedUpdate, MsgType,
    OnlineSet, Party, RoundMessage, SetSignature, ShareDelivery, SignatureBundle, ZetaShare,
};
use super::{OpCounters, ProtocolAbort};

struct IterationScratch {
    k: u64,
    online: BTreeSet<u64>,
    masked: BTreeMap<u64, Vec<GroupElement>>,
    online_bytes: Vec<u8>,
}

/// The aggregation server. It relays setup traffic, tracks the online
/// set each iteration, and unmasks the aggregate in round 3.
pub struct ServerState {
    cfg: Arc<ProtocolConfig>,
    verify_keys: BTreeMap<u64, GroupElement>,
    ka: KeyPair,
    pub counters: OpCounters,
    /// Total baby-step giant-step multiplications spent unmasking.
    pub dlog_steps: u64,

    user_set: BTreeSet<u64>,
    announced: BTreeMap<u64, KeyAnnounce>,
    mac_keys: BTreeMap<u64, SharedKey>,
    current: Option<IterationScratch>,

    /// Server outputs per iteration.
    pub outputs: BTreeMap<u64, Vec<u64>>,
    /// Accepted online set `O` per iteration.
    pub online_sets: BTreeMap<u64, Vec<u64>>,
    /// Round-3 responder set `O'` per iteration.
    pub responders: BTreeMap<u64, Vec<u64>>,
    /// `(k, user)` pairs excluded by the MAC check.
    pub mac_exclusions: Vec<(u64, u64)>,
}

impl ServerState {
    pub fn new(
        cfg: Arc<ProtocolConfig>,
        verify_keys: BTreeMap<u64, GroupElement>,
        rng: &mut ChaCha20Rng,
    ) -> Self {
        let ka = ka_gen(rng);
        ServerState {
            cfg,
            verify_keys,
            ka,
            counters: OpCounters::default(),
            dlog_steps: 0,
            user_set: BTreeSet::new(),
            announced: BTreeMap::new(),
            mac_keys: BTreeMap::new(),
            current: None,
            outputs: BTreeMap::new(),
            online_sets: BTreeMap::new(),
            responders: BTreeMap::new(),
            mac_exclusions: Vec::new(),
        }
    }

    /// The user set `U_S` output by setup.
    pub fn user_set(&self) -> &BTreeSet<u64> {
        &self.user_set
    }

    /// Runs one setup round (1 or 2).
    pub fn setup_step(
        &mut self,
        round: u8,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        match round {
            1 => self.setup_round1(inbox),
            2 => self.setup_round2(inbox),
            _ => panic!("server setup has rounds 1..=2"),
        }
    }

    fn setup_round1(&mut self, inbox: &[RoundMessage]) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        for msg in sorted_by_sender(inbox) {
            let Party::User(sender) = msg.sender else {
                continue;
            };
            let Ok(announce) = KeyAnnounce::decode(&msg.payload) else {
                continue;
            };
            if announce.user != sender {
                continue;
            }
            let Some(vk) = self.verify_keys.get(&sender) else {
                continue;
            };
            self.counters.sig_verifications += 1;
            // Invalid signature: ignore this user entirely.
            if !verify(vk, &key_sign_bytes(sender, &announce.pk), &announce.sig) {
                continue;
            }
            self.user_set.insert(sender);
            if self.cfg.defenses.mac_updates {
                if let Ok(key) = ka_agree(&self.ka.sk, &announce.pk) {
                    self.mac_keys.insert(sender, key);
                }
            }
            self.announced.insert(sender, announce);
        }
        if self.user_set.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewUsers);
        }
        let list = KeyList {
            server_pk: self.ka.pk.clone(),
            entries: self.announced.values().cloned().collect(),
        };
        let payload = list.encode();
        Ok(self
            .user_set
            .iter()
            .map(|&j| RoundMessage {
                k: 0,
                round: 1,
                sender: Party::Server,
                receiver: Party::User(j),
                msg_type: MsgType::KeyList,
                payload: payload.clone(),
                mac: None,
            })
            .collect())
    }

    fn setup_round2(&mut self, inbox: &[RoundMessage]) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        let mut senders = BTreeSet::new();
        let mut per_receiver: BTreeMap<u64, Vec<(u64, crate::crypto::Ciphertext)>> =
            BTreeMap::new();
        for msg in sorted_by_sender(inbox) {
            let Party::User(sender) = msg.sender else {
                continue;
            };
            if !self.user_set.contains(&sender) {
                continue;
            }
            let Ok(shares) = EncShares::decode(&msg.payload) else {
                continue;
            };
            if shares.sender != sender {
                continue;
            }
            senders.insert(sender);
            for (receiver, ct) in shares.shares {
                if self.announced.contains_key(&receiver) {
                    per_receiver.entry(receiver).or_default().push((sender, ct));
                }
            }
        }
        if senders.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewUsers);
        }
        // U_S narrows to the users who actually distributed shares.
        self.user_set = senders;
        Ok(per_receiver
            .into_iter()
            .map(|(receiver, mut shares)| {
                shares.sort_by_key(|(s, _)| *s);
                let delivery = ShareDelivery { receiver, shares };
                RoundMessage {
                    k: 0,
                    round: 2,
                    sender: Party::Server,
                    receiver: Party::User(receiver),
                    msg_type: MsgType::ShareDelivery,
                    payload: delivery.encode(),
                    mac: None,
                }
            })
            .collect())
    }

    /// Runs one aggregation round for iteration `k`. Round 3 stores the
    /// unmasked output in [`ServerState::outputs`] and returns no
    /// messages.
    pub fn aggregation_step(
        &mut self,
        k: u64,
        round: u8,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        match round {
            1 => self.collect_round1(k, inbox),
            2 => match self.cfg.mode {
                Mode::SemiHonest => Ok(Vec::new()),
                Mode::Malicious => self.round2_bundle(k, inbox),
            },
            3 => {
                self.round3_unmask(k, inbox)?;
                Ok(Vec::new())
            }
            _ => panic!("aggregation has rounds 1..=3"),
        }
    }

    /// Round 1: accept well-formed (and, under the MAC defense,
    /// authenticated) masked updates, fix the online set, broadcast it.
    pub fn collect_round1(
        &mut self,
        k: u64,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        let params = &self.cfg.masking_group;
        let mut online = BTreeSet::new();
        let mut masked = BTreeMap::new();
        for msg in sorted_by_sender(inbox) {
            let Party::User(sender) = msg.sender else {
                continue;
            };
            if !self.user_set.contains(&sender) {
                continue;
            }
            let Ok(update) = MaskedUpdate::decode(&msg.payload, params) else {
                continue;
            };
            if update.user != sender || update.k != k || update.elements.len() != self.cfg.vector_len
            {
                continue;
            }
            if self.cfg.defenses.mac_updates {
                let authentic = match (&msg.mac, self.mac_keys.get(&sender)) {
                    (Some(tag), Some(key)) => mac_verify(key, &msg.payload, tag),
                    _ => false,
                };
                if !authentic {
                    self.mac_exclusions.push((k, sender));
                    continue;
                }
            }
            online.insert(sender);
            masked.insert(sender, update.elements);
        }
        if online.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewOnline);
        }
        let set = OnlineSet {
            k,
            members: online.clone(),
        };
        let online_bytes = set.encode();
        self.online_sets.insert(k, online.iter().copied().collect());
        self.current = Some(IterationScratch {
            k,
            online,
            masked,
            online_bytes,
        });
        Ok(vec![RoundMessage {
            k,
            round: 1,
            sender: Party::Server,
            receiver: Party::Broadcast,
            msg_type: MsgType::OnlineSet,
            payload: online_bytes_clone(&self.current),
            mac: None,
        }])
    }

    /// Round 2 (malicious mode): validate set signatures and forward
    /// them — as one aggregate under the multisig defense, otherwise as
    /// the full bundle.
    pub fn round2_bundle(
        &mut self,
        k: u64,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        let scratch = self.current.as_ref().expect("round 1 ran");
        assert_eq!(scratch.k, k);
        let expected_scheme = if self.cfg.defenses.multisig {
            SigScheme::Aggregatable
        } else {
            SigScheme::Schnorr
        };
        let mut valid: BTreeMap<u64, Signature> = BTreeMap::new();
        for msg in sorted_by_sender(inbox) {
            let Party::User(sender) = msg.sender else {
                continue;
            };
            if !scratch.online.contains(&sender) {
                continue;
            }
            let Ok(set_sig) = SetSignature::decode(&msg.payload) else {
                continue;
            };
            if set_sig.user != sender || set_sig.k != k || set_sig.sig.scheme != expected_scheme {
                continue;
            }
            let Some(vk) = self.verify_keys.get(&sender) else {
                continue;
            };
            self.counters.sig_verifications += 1;
            if verify(vk, &scratch.online_bytes, &set_sig.sig) {
                valid.insert(sender, set_sig.sig);
            }
        }
        if valid.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewSignatures);
        }
        let (msg_type, payload) = if self.cfg.defenses.multisig {
            let signers: Vec<u64> = valid.keys().copied().collect();
            let sigs: Vec<Signature> = valid.values().cloned().collect();
            let asig = msig_aggregate(&sigs).expect("uniform scheme enforced above");
            (
                MsgType::AggregateSig,
                AggregateSig { k, signers, asig }.encode(),
            )
        } else {
            (
                MsgType::SignatureBundle,
                SignatureBundle {
                    k,
                    entries: valid.into_iter().collect(),
                }
                .encode(),
            )
        };
        Ok(vec![RoundMessage {
            k,
            round: 2,
            sender: Party::Server,
            receiver: Party::Broadcast,
            msg_type,
            payload,
            mac: None,
        }])
    }

    /// Round 3: reconstruct the summed mask in the exponent from the
    /// responders' shares, divide it out of the aggregated update, and
    /// take the bounded discrete log.
    pub fn round3_unmask(
        &mut self,
        k: u64,
        inbox: &[RoundMessage],
    ) -> Result<Vec<u64>, ProtocolAbort> {
        let params = self.cfg.masking_group.clone();
        let scratch = self.current.take().expect("round 1 ran");
        assert_eq!(scratch.k, k);
        let mut zetas: BTreeMap<u64, Vec<GroupElement>> = BTreeMap::new();
        for msg in sorted_by_sender(inbox) {
            let Party::User(sender) = msg.sender else {
                continue;
            };
            if !self.user_set.contains(&sender) {
                continue;
            }
            let Ok(zeta) = ZetaShare::decode(&msg.payload, &params) else {
                continue;
            };
            if zeta.user != sender || zeta.k != k || zeta.elements.len() != self.cfg.vector_len {
                continue;
            }
            zetas.insert(sender, zeta.elements);
        }
        if zetas.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewResponders);
        }
        self.responders.insert(k, zetas.keys().copied().collect());

        let bound = self.cfg.sum_bound();
        let mut output = Vec::with_capacity(self.cfg.vector_len);
        for m in 0..self.cfg.vector_len {
            let points: Vec<(u64, GroupElement)> = zetas
                .iter()
                .map(|(&j, elems)| (j, elems[m].clone()))
                .collect();
            let mask_sum = exponent_recon(&points, self.cfg.t, &params)
                .expect("responder count and index range checked");
            self.counters.group_exponentiations += self.cfg.t as u64;
            let mut numerator = params.identity();
            for i in &scratch.online {
                numerator = params.mul(&numerator, &scratch.masked[i][m]);
            }
            let ratio = params.mul(&numerator, &params.inv(&mask_sum));
            self.counters.group_exponentiations += 1;
            let base = params.iteration_base(k, m as u64);
            let (sum, steps) = bounded_dlog_counted(&params, &base, &ratio, &bound)
                .map_err(|e| match e {
                    GroupError::NotInRange => ProtocolAbort::NotInRange,
                    _ => ProtocolAbort::Malformed("zeta_share"),
                })?;
            self.dlog_steps += steps;
            output.push(u64::try_from(sum.value()).expect("bound fits in u64"));
        }
        self.outputs.insert(k, output.clone());
        Ok(output)
    }
}

fn sorted_by_sender(inbox: &[RoundMessage]) -> Vec<&RoundMessage> {
    let mut msgs: Vec<&RoundMessage> = inbox.iter().collect();
    msgs.sort_by_key(|m| m.sender);
    msgs
}

fn online_bytes_clone(current: &Option<IterationScratch>) -> Vec<u8> {
    current
        .as_ref()
        .map(|s| s.online_bytes.clone())
        .expect("scratch just stored")
}
