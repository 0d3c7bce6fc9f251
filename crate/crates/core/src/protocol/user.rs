//! The user-side state machine.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;

use crate::crypto::{
    ae_decrypt, ae_encrypt, ka_agree, ka_gen, mac_tag, msig_sign, msig_verify, sign, ss_share,
    verify, KeyPair, SharedKey, SigScheme,
};
use crate::group::{GroupElement, Scalar};

use super::config::{Mode, ProtocolConfig};
use super::messages::{
    decode_share_bundle, encode_share_bundle, key_sign_bytes, share_context, AggregateSig,
    EncShares, KeyList, MaskedUpdate, MsgType, OnlineSet, Party, RoundMessage, SetSignature,
    ShareDelivery, SignatureBundle, ZetaShare,
};
use super::{OpCounters, ProtocolAbort};

/// One user. Stepped once per round by the harness; each step consumes
/// the prior round's messages addressed to this user and returns the
/// messages to put on the wire.
pub struct UserState {
    id: u64,
    cfg: Arc<ProtocolConfig>,
    signing: KeyPair,
    verify_keys: BTreeMap<u64, GroupElement>,
    /// `inputs[k-1][m]`, supplied by the harness.
    inputs: Vec<Vec<u64>>,
    rng: ChaCha20Rng,
    pub counters: OpCounters,

    ka: Option<KeyPair>,
    server_key: Option<SharedKey>,
    peer_keys: BTreeMap<u64, SharedKey>,
    /// Mask secrets, `secrets[row][m]` with one row per iteration under
    /// the per-iteration variant and a single row otherwise.
    secrets: Vec<Vec<Scalar>>,
    user_set_1: BTreeSet<u64>,
    /// Final user set after setup (the peers whose shares decrypted).
    users: BTreeSet<u64>,
    /// `received[j][row][m]`: this user's share of peer j's secrets.
    received_shares: BTreeMap<u64, Vec<Vec<Scalar>>>,
    setup_complete: bool,

    current_online: Option<OnlineSet>,
    dormant: bool,

    setup_round: u8,
    agg_cursor: (u64, u8),
}

impl UserState {
    pub fn new(
        id: u64,
        cfg: Arc<ProtocolConfig>,
        signing: KeyPair,
        verify_keys: BTreeMap<u64, GroupElement>,
        inputs: Vec<Vec<u64>>,
        rng: ChaCha20Rng,
    ) -> Self {
        assert_eq!(inputs.len(), cfg.iterations as usize, "one input per iteration");
        UserState {
            id,
            cfg,
            signing,
            verify_keys,
            inputs,
            rng,
            counters: OpCounters::default(),
            ka: None,
            server_key: None,
            peer_keys: BTreeMap::new(),
            secrets: Vec::new(),
            user_set_1: BTreeSet::new(),
            users: BTreeSet::new(),
            received_shares: BTreeMap::new(),
            setup_complete: false,
            current_online: None,
            dormant: false,
            setup_round: 0,
            agg_cursor: (0, 3),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// The user set `U_i` established by setup.
    pub fn user_set(&self) -> &BTreeSet<u64> {
        &self.users
    }

    pub fn setup_complete(&self) -> bool {
        self.setup_complete
    }

    pub fn peer_share_count(&self) -> usize {
        self.received_shares.len()
    }

    /// Runs one setup round. Rounds must be executed in order 1, 2, 3.
    pub fn setup_step(
        &mut self,
        round: u8,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        assert_eq!(round, self.setup_round + 1, "setup rounds run in order");
        self.setup_round = round;
        match round {
            1 => Ok(self.setup_round1()),
            2 => self.setup_round2(inbox),
            3 => self.setup_round3(inbox).map(|()| Vec::new()),
            _ => panic!("setup has rounds 1..=3"),
        }
    }

    fn setup_round1(&mut self) -> Vec<RoundMessage> {
        let kp = ka_gen(&mut self.rng);
        let sig = sign(&self.signing, &key_sign_bytes(self.id, &kp.pk));
        let announce = super::messages::KeyAnnounce {
            user: self.id,
            pk: kp.pk.clone(),
            sig,
        };
        self.ka = Some(kp);
        vec![RoundMessage {
            k: 0,
            round: 1,
            sender: Party::User(self.id),
            receiver: Party::Server,
            msg_type: MsgType::KeyAnnounce,
            payload: announce.encode(),
            mac: None,
        }]
    }

    fn setup_round2(&mut self, inbox: &[RoundMessage]) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        let msg = expect_one(inbox, MsgType::KeyList)?;
        let list = KeyList::decode(&msg.payload)?;
        let ka = self.ka.as_ref().expect("round 1 ran");

        // Any bad relayed signature means the relay itself is corrupt.
        for entry in &list.entries {
            let vk = self
                .verify_keys
                .get(&entry.user)
                .ok_or(ProtocolAbort::BadServerSignature(entry.user))?;
            self.counters.sig_verifications += 1;
            if !verify(vk, &key_sign_bytes(entry.user, &entry.pk), &entry.sig) {
                return Err(ProtocolAbort::BadServerSignature(entry.user));
            }
        }
        if list.entries.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewUsers);
        }
        for entry in &list.entries {
            self.user_set_1.insert(entry.user);
            let key = ka_agree(&ka.sk, &entry.pk)
                .map_err(|_| ProtocolAbort::Malformed("key_list"))?;
            self.peer_keys.insert(entry.user, key);
        }
        if self.cfg.defenses.mac_updates {
            let key = ka_agree(&ka.sk, &list.server_pk)
                .map_err(|_| ProtocolAbort::Malformed("key_list"))?;
            self.server_key = Some(key);
        }

        // Draw the mask secrets and share each one over U_i^1.
        let q = self.cfg.masking_group.q().clone();
        let rows = self.cfg.mask_rows();
        let l = self.cfg.vector_len;
        for _ in 0..rows {
            let row: Vec<Scalar> = (0..l).map(|_| Scalar::random(&mut self.rng, &q)).collect();
            self.secrets.push(row);
        }
        let indices: Vec<u64> = self.user_set_1.iter().copied().collect();
        // bundles[receiver][row * L + m]
        let mut bundles: BTreeMap<u64, Vec<Scalar>> =
            indices.iter().map(|&j| (j, Vec::new())).collect();
        for row in 0..rows {
            for m in 0..l {
                let shares = ss_share(&self.secrets[row][m], &indices, self.cfg.t, &q, &mut self.rng)
                    .expect("threshold checked against set size");
                for share in shares {
                    bundles.get_mut(&share.index).unwrap().push(share.value);
                }
            }
        }
        let mut out = Vec::with_capacity(indices.len());
        for (&receiver, values) in &bundles {
            let plaintext = encode_share_bundle(values, &q);
            let key = &self.peer_keys[&receiver];
            let ct = ae_encrypt(key, &plaintext, &share_context(self.id, receiver), &mut self.rng);
            out.push((receiver, ct));
        }
        let msg = EncShares {
            sender: self.id,
            shares: out,
        };
        Ok(vec![RoundMessage {
            k: 0,
            round: 2,
            sender: Party::User(self.id),
            receiver: Party::Server,
            msg_type: MsgType::EncShares,
            payload: msg.encode(),
            mac: None,
        }])
    }

    fn setup_round3(&mut self, inbox: &[RoundMessage]) -> Result<(), ProtocolAbort> {
        let msg = expect_one(inbox, MsgType::ShareDelivery)?;
        let delivery = ShareDelivery::decode(&msg.payload)?;
        if delivery.shares.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewUsers);
        }
        let rows = self.cfg.mask_rows();
        let l = self.cfg.vector_len;
        for (sender, ct) in &delivery.shares {
            let Some(key) = self.peer_keys.get(sender) else {
                continue;
            };
            // Failed decryptions are ignored; the sender simply drops
            // out of this user's set.
            let Ok(plaintext) = ae_decrypt(key, ct, &share_context(*sender, self.id)) else {
                continue;
            };
            let Some(values) = decode_share_bundle(&plaintext, rows * l, &self.cfg.masking_group)
            else {
                continue;
            };
            let matrix: Vec<Vec<Scalar>> = values.chunks(l).map(|c| c.to_vec()).collect();
            self.received_shares.insert(*sender, matrix);
        }
        if self.received_shares.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewUsers);
        }
        self.users = self.received_shares.keys().copied().collect();
        self.setup_complete = true;
        Ok(())
    }

    /// Runs one aggregation round for iteration `k`.
    pub fn aggregation_step(
        &mut self,
        k: u64,
        round: u8,
        inbox: &[RoundMessage],
    ) -> Result<Vec<RoundMessage>, ProtocolAbort> {
        assert!(self.setup_complete || self.setup_round == 3, "setup must finish first");
        assert!(
            (k, round) > self.agg_cursor,
            "aggregation rounds advance monotonically"
        );
        self.agg_cursor = (k, round);
        match round {
            1 => {
                self.current_online = None;
                self.dormant = false;
                Ok(vec![self.compute_masked_update(k)?])
            }
            2 => {
                let msg = expect_one(inbox, MsgType::OnlineSet)?;
                let online = OnlineSet::decode(&msg.payload)?;
                if online.k != k {
                    return Err(ProtocolAbort::Malformed("online_set"));
                }
                if !online.members.contains(&self.id) {
                    // The server did not include this user; it sits the
                    // iteration out.
                    self.dormant = true;
                    self.current_online = Some(online);
                    return Ok(Vec::new());
                }
                self.current_online = Some(online.clone());
                match self.cfg.mode {
                    Mode::SemiHonest => Ok(Vec::new()),
                    Mode::Malicious => Ok(vec![self.round2_sign_set(&online, k)?]),
                }
            }
            3 => {
                if self.dormant {
                    return Ok(Vec::new());
                }
                Ok(vec![self.round3_zeta(inbox, k)?])
            }
            _ => panic!("aggregation has rounds 1..=3"),
        }
    }

    /// Round 1: mask the input vector in the exponent,
    /// `H(k,m)^{x[m] + r[m]}`, optionally HMAC-tagged for the server.
    pub fn compute_masked_update(&mut self, k: u64) -> Result<RoundMessage, ProtocolAbort> {
        let params = &self.cfg.masking_group;
        let q = params.q();
        let x = &self.inputs[(k - 1) as usize];
        if x.iter().any(|&v| v >= self.cfg.input_bound()) {
            return Err(ProtocolAbort::InputOutOfRange);
        }
        let row = &self.secrets[self.cfg.mask_row(k)];
        let mut elements = Vec::with_capacity(self.cfg.vector_len);
        for (m, (&xv, r)) in x.iter().zip(row).enumerate() {
            let exponent = Scalar::from_u64(xv, q).add(r, q);
            let base = params.iteration_base(k, m as u64);
            elements.push(params.exp(&base, &exponent));
            self.counters.group_exponentiations += 1;
        }
        let payload = MaskedUpdate {
            user: self.id,
            k,
            elements,
        }
        .encode(params);
        let mac = if self.cfg.defenses.mac_updates {
            let key = self.server_key.as_ref().expect("mac key set during setup");
            Some(mac_tag(key, &payload))
        } else {
            None
        };
        Ok(RoundMessage {
            k,
            round: 1,
            sender: Party::User(self.id),
            receiver: Party::Server,
            msg_type: MsgType::MaskedUpdate,
            payload,
            mac,
        })
    }

    /// Round 2 (malicious mode): check the announced online set and sign
    /// its canonical encoding.
    pub fn round2_sign_set(
        &mut self,
        online: &OnlineSet,
        k: u64,
    ) -> Result<RoundMessage, ProtocolAbort> {
        if !online.members.is_subset(&self.users) {
            return Err(ProtocolAbort::SetNotSubset);
        }
        if online.members.len() < self.cfg.t {
            return Err(ProtocolAbort::TooFewOnline);
        }
        let bytes = online.encode();
        let sig = if self.cfg.defenses.multisig {
            msig_sign(&self.signing, &bytes)
        } else {
            sign(&self.signing, &bytes)
        };
        let msg = SetSignature {
            user: self.id,
            k,
            sig,
        };
        Ok(RoundMessage {
            k,
            round: 2,
            sender: Party::User(self.id),
            receiver: Party::Server,
            msg_type: MsgType::SetSignature,
            payload: msg.encode(),
            mac: None,
        })
    }

    /// Round 3: in malicious mode first check the set signatures, then
    /// publish `H(k,m)` raised to the sum of this user's stored shares
    /// over the online set.
    pub fn round3_zeta(
        &mut self,
        inbox: &[RoundMessage],
        k: u64,
    ) -> Result<RoundMessage, ProtocolAbort> {
        let online = self
            .current_online
            .clone()
            .ok_or(ProtocolAbort::Malformed("online_set"))?;
        if self.cfg.mode == Mode::Malicious {
            self.check_set_signatures(&online, inbox, k)?;
        }
        let params = &self.cfg.masking_group;
        let q = params.q();
        let row = self.cfg.mask_row(k);
        let mut elements = Vec::with_capacity(self.cfg.vector_len);
        for m in 0..self.cfg.vector_len {
            let mut sum = Scalar::zero();
            for j in &online.members {
                let shares = self
                    .received_shares
                    .get(j)
                    .ok_or(ProtocolAbort::SetNotSubset)?;
                sum = sum.add(&shares[row][m], q);
            }
            let base = params.iteration_base(k, m as u64);
            elements.push(params.exp(&base, &sum));
            self.counters.group_exponentiations += 1;
        }
        let msg = ZetaShare {
            user: self.id,
            k,
            elements,
        };
        Ok(RoundMessage {
            k,
            round: 3,
            sender: Party::User(self.id),
            receiver: Party::Server,
            msg_type: MsgType::ZetaShare,
            payload: msg.encode(params),
            mac: None,
        })
    }

    fn check_set_signatures(
        &mut self,
        online: &OnlineSet,
        inbox: &[RoundMessage],
        k: u64,
    ) -> Result<(), ProtocolAbort> {
        let bytes = online.encode();
        if let Some(msg) = find_one(inbox, MsgType::AggregateSig) {
            let agg = AggregateSig::decode(&msg.payload)?;
            if agg.k != k || agg.signers.len() < self.cfg.t {
                return Err(ProtocolAbort::TooFewSignatures);
            }
            let mut pks = Vec::with_capacity(agg.signers.len());
            for id in &agg.signers {
                pks.push(
                    self.verify_keys
                        .get(id)
                        .ok_or(ProtocolAbort::BadAggregate)?
                        .clone(),
                );
            }
            self.counters.sig_verifications += 1;
            if !msig_verify(&pks, &bytes, &agg.asig) {
                return Err(ProtocolAbort::BadAggregate);
            }
            return Ok(());
        }
        let msg = expect_one(inbox, MsgType::SignatureBundle)?;
        let bundle = SignatureBundle::decode(&msg.payload)?;
        if bundle.k != k {
            return Err(ProtocolAbort::Malformed("signature_bundle"));
        }
        let mut valid = 0usize;
        for (id, sig) in &bundle.entries {
            let Some(vk) = self.verify_keys.get(id) else {
                continue;
            };
            self.counters.sig_verifications += 1;
            if sig.scheme == SigScheme::Schnorr && verify(vk, &bytes, sig) {
                valid += 1;
            }
        }
        if valid < self.cfg.t {
            return Err(ProtocolAbort::TooFewSignatures);
        }
        Ok(())
    }
}

fn expect_one<'a>(
    inbox: &'a [RoundMessage],
    ty: MsgType,
) -> Result<&'a RoundMessage, ProtocolAbort> {
    find_one(inbox, ty).ok_or(ProtocolAbort::Malformed(match ty {
        MsgType::KeyList => "key_list",
        MsgType::ShareDelivery => "share_delivery",
        MsgType::OnlineSet => "online_set",
        MsgType::SignatureBundle => "signature_bundle",
        _ => "message",
    }))
}

fn find_one(inbox: &[RoundMessage], ty: MsgType) -> Option<&RoundMessage> {
    inbox.iter().find(|m| m.msg_type == ty)
}
