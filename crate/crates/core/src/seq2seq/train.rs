use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::features::{question_tokens, Example};
use super::forward::DropRng;
use super::params::{Params, Seq2SeqConfig};
use super::vocab::reduce_vocabulary;
use super::Seq2Seq;
use crate::dataset::TrainingRecord;
use crate::error::{Error, Result};
use crate::nn::{Adam, AdamConfig, Tensors};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    pub seed: u64,
    /// Directory for per-epoch and best-dev checkpoints.
    pub checkpoint_dir: Option<PathBuf>,
    /// Write `epoch-N.json` after every epoch; `best.json` is always written.
    #[serde(default = "yes")]
    pub epoch_checkpoints: bool,
}

fn yes() -> bool {
    true
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            optimizer: AdamConfig::default(),
            seed: 17,
            checkpoint_dir: None,
            epoch_checkpoints: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    /// 0 is the untrained model.
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Real> {
    pub model: Seq2Seq<T>,
    pub history: Vec<EpochReport>,
    /// Epoch whose parameters were kept (lowest dev loss, else the last).
    pub best_epoch: usize,
}

impl<T: Real> Seq2Seq<T> {
    /// Fresh model whose vocabulary comes from the passages and questions of `records`.
    pub fn for_records(records: &[TrainingRecord], config: Seq2SeqConfig, seed: u64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid("no training records"));
        }
        let corpus = records.iter().flat_map(|r| {
            r.passage
                .tokens
                .iter()
                .map(|t| t.text.to_lowercase())
                .chain(question_tokens(&r.question))
        });
        let vocab = reduce_vocabulary(corpus, config.vocab_size)?;
        Seq2Seq::new(config, vocab, seed)
    }

    pub fn examples(&self, records: &[TrainingRecord]) -> Result<Vec<Example>> {
        records
            .iter()
            .map(|r| Example::from_record(r, &self.vocab, self.config.max_question_len))
            .collect()
    }

    /// Minibatch Adam on teacher-forced cross-entropy, gradients summed over
    /// a batch in order and divided by its token count.
    pub fn fit(mut self, train: &[Example], dev: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome<T>> {
        if train.is_empty() {
            return Err(Error::invalid("no training examples"));
        }
        if cfg.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        let mut rng = DropRng::seed_from_u64(cfg.seed);
        let zeros = Params::zeros(&self.config, self.vocab.len());
        let mut opt = Adam::new(cfg.optimizer, zeros.clone());
        let mut grads = zeros;
        let eval = |m: &Seq2Seq<T>| (!dev.is_empty()).then(|| m.mean_loss(dev));

        let start = Instant::now();
        let mut history = vec![EpochReport {
            epoch: 0,
            train_loss: self.mean_loss(train),
            dev_loss: eval(&self),
            seconds: start.elapsed().as_secs_f64(),
        }];
        let mut best: Option<(f64, usize, Params<T>)> = None;
        let mut order: Vec<usize> = (0..train.len()).collect();
        for epoch in 1..=cfg.epochs {
            let t0 = Instant::now();
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            let mut epoch_tokens = 0usize;
            for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
                grads.zero();
                let mut loss = 0.0;
                let mut tokens = 0usize;
                for &i in batch {
                    loss += self.loss_and_grad(&train[i], Some(&mut grads), Some(&mut rng));
                    tokens += train[i].targets.len();
                }
                if !loss.is_finite() || !grads.all_finite() {
                    return Err(Error::NonFinite(format!(
                        "epoch {epoch}, batch {b}: loss {loss} over {tokens} tokens"
                    )));
                }
                let scale = T::lit(1.0 / tokens.max(1) as f64);
                for (_, mut g) in grads.tensors_mut() {
                    g.mapv_inplace(|x| x * scale);
                }
                opt.update(&mut self.params, &mut grads);
                epoch_loss += loss;
                epoch_tokens += tokens;
            }
            let dev_loss = eval(&self);
            let report = EpochReport {
                epoch,
                train_loss: epoch_loss / epoch_tokens.max(1) as f64,
                dev_loss,
                seconds: t0.elapsed().as_secs_f64(),
            };
            log::info!(
                "epoch {epoch}: train loss {:.4}, dev loss {}",
                report.train_loss,
                dev_loss.map_or("-".into(), |d| format!("{d:.4}"))
            );
            if let Some(dir) = cfg.checkpoint_dir.as_ref().filter(|_| cfg.epoch_checkpoints) {
                self.save(dir.join(format!("epoch-{epoch}.json")))?;
            }
            if let Some(d) = dev_loss {
                if best.as_ref().is_none_or(|(b, _, _)| d < *b) {
                    best = Some((d, epoch, self.params.clone()));
                    if let Some(dir) = &cfg.checkpoint_dir {
                        self.save(dir.join("best.json"))?;
                    }
                }
            }
            history.push(report);
        }
        let mut best_epoch = cfg.epochs;
        if let Some((_, e, params)) = best {
            best_epoch = e;
            self.params = params;
        } else if let Some(dir) = &cfg.checkpoint_dir {
            self.save(dir.join("best.json"))?;
        }
        Ok(TrainOutcome {
            model: self,
            history,
            best_epoch,
        })
    }
}

/// Build the vocabulary from `records`, initialise, and train.
pub fn train<T: Real>(
    records: &[TrainingRecord],
    dev: &[TrainingRecord],
    config: Seq2SeqConfig,
    train_config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let model = Seq2Seq::<T>::for_records(records, config, train_config.seed)?;
    let train_ex = model.examples(records)?;
    let dev_ex = model.examples(dev)?;
    model.fit(&train_ex, &dev_ex, train_config)
}
