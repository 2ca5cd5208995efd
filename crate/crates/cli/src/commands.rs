use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Result;
use log::info;
use sense::eval::{
    decoding_sweep, link_prediction, train_ovr_classifier, write_error_csv, write_sweep_csv, DecodeExperiment,
    SequenceMode, TableSource,
};
use sense::io::{load_embeddings, read_sequence_vector, save_embeddings, write_sequence_vector};
use sense::rng::seeded;
use sense::{
    decode, encode_ids, independent_dot_stats, shifted_dot_stats, train, EmbeddingTable, Error, Graph, LabelSet,
    Matrix, NodeDocs, SampleConfig, SenseModel, SequenceVector, TrainConfig, TrainMode, Vocab, WalkConfig,
};

use crate::args::{
    ClassifyCmd, DecodeCmd, EncodeCmd, LinkpredCmd, SequenceModeArg, SweepCmd, TheoremCmd, TrainCmd, TrainOpts,
};
use crate::manifest::RunManifest;

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(BufWriter::new(f))
}

fn record_train_opts(m: &mut RunManifest, o: &TrainOpts) {
    m.config("edges", o.edges.display());
    m.config(
        "texts",
        o.texts.as_ref().map_or("-".into(), |p| p.display().to_string()),
    );
    m.config("directed", o.directed);
    m.config("dim", o.dim);
    m.config("variant", format!("{:?}", o.variant).to_lowercase());
    m.config("mode", format!("{:?}", TrainMode::from(o.mode)).to_lowercase());
    m.config("walks_per_node", o.walks_per_node);
    m.config("walk_length", o.walk_length);
    m.config("text_window", o.text_window);
    m.config("node_window", o.node_window);
    m.config("p", o.p);
    m.config("q", o.q);
    m.config("negatives", o.negatives);
    m.config("epochs", o.epochs);
    m.config("beta1", o.beta1);
    m.config("beta2", o.beta2);
    m.config("min_count", o.min_count);
    m.config("subsample", o.subsample);
    m.config("char_limit", o.char_limit);
    m.config("threads", o.threads);
}

fn sample_config(o: &TrainOpts) -> SampleConfig {
    SampleConfig {
        walk: WalkConfig {
            walks_per_node: o.walks_per_node,
            walk_length: o.walk_length,
            return_param: o.p,
            inout_param: o.q,
            node_window: o.node_window,
        },
        text_window: o.text_window,
        mode: o.mode.into(),
    }
}

fn train_config(o: &TrainOpts) -> TrainConfig {
    TrainConfig {
        dim: o.dim,
        variant: o.variant.into(),
        epochs: o.epochs,
        negatives: o.negatives,
        beta1: o.beta1,
        beta2: o.beta2,
        seed: o.seed,
        threads: o.threads,
        ..TrainConfig::default()
    }
}

/// Loaded graph plus, when the mode uses text, the vocabulary and node documents.
struct Corpus {
    graph: Graph,
    text: Option<(Vocab, NodeDocs)>,
}

fn load_corpus(o: &TrainOpts, manifest: &mut RunManifest) -> Result<Corpus> {
    let cfg = train_config(o);
    cfg.validate()?;
    sample_config(o).validate()?;
    manifest.input(&o.edges)?;
    let graph = Graph::load_edge_list(&o.edges, o.directed)?;
    info!("{} nodes, {} arcs", graph.node_count(), graph.arc_count());
    let mode = TrainMode::from(o.mode);
    let text = if mode.uses_text() {
        let path = o
            .texts
            .as_ref()
            .ok_or_else(|| Error::Config("--texts is required unless --mode graph-only".into()))?;
        manifest.input(path)?;
        let docs = NodeDocs::load(path, &graph, Some(o.char_limit))?;
        let vocab = Vocab::build(&docs, o.min_count, o.subsample)?;
        info!("vocabulary of {} words", vocab.len());
        Some((vocab, docs))
    } else {
        None
    };
    Ok(Corpus { graph, text })
}

fn fit(graph: &Graph, text: Option<&(Vocab, NodeDocs)>, o: &TrainOpts) -> sense::Result<SenseModel> {
    let (encoded, vocab) = match text {
        Some((vocab, docs)) => (vocab.encode_docs(docs), Some(vocab)),
        None => (
            Vocab::from_counts([], o.subsample).encode_docs(&NodeDocs::empty(graph.node_count())),
            None,
        ),
    };
    let (model, report) = train(graph, &encoded, vocab, &sample_config(o), &train_config(o))?;
    for (i, loss) in report.epoch_mean_loss.iter().enumerate() {
        info!("epoch {} mean loss {loss:.5}", i + 1);
    }
    Ok(model)
}

pub fn train_cmd(cmd: &TrainCmd) -> Result<()> {
    let mut m = RunManifest::new("train", Some(cmd.opts.seed));
    record_train_opts(&mut m, &cmd.opts);
    let corpus = load_corpus(&cmd.opts, &mut m)?;
    let labels = match &cmd.labels {
        Some(p) => {
            m.input(p)?;
            Some(LabelSet::load(p, &corpus.graph)?)
        }
        None => None,
    };
    m.stage("load");

    let model = fit(&corpus.graph, corpus.text.as_ref(), &cmd.opts)?;
    m.stage("train");

    let (rows, _) = model.node_embeddings(false);
    save_embeddings(&cmd.out, corpus.graph.node_ids(), &rows)?;
    m.output(&cmd.out);
    if let Some(labels) = labels {
        let report = train_ovr_classifier(&rows, &labels, &Default::default())?;
        let path = cmd.out.with_extension("classify.csv");
        write_error_csv(create(&path)?, &report.rows())?;
        m.output(&path);
    }
    m.stage("write");
    m.write_beside(&cmd.out)?;
    Ok(())
}

fn load_table(path: &Path, manifest: &mut RunManifest) -> Result<EmbeddingTable> {
    manifest.input(path)?;
    let file = load_embeddings(path)?;
    Ok(EmbeddingTable::new(file.ids, file.rows, true)?)
}

pub fn encode_cmd(cmd: &EncodeCmd) -> Result<()> {
    let mut m = RunManifest::new("encode", None);
    m.config("sequence", cmd.sequence.join(","));
    let table = load_table(&cmd.embeddings, &mut m)?;
    m.stage("load");
    let seq = encode_ids(&cmd.sequence, &table)?;
    let mut w = create(&cmd.out)?;
    write_sequence_vector(&mut w, seq.len(), seq.values())?;
    w.flush()?;
    m.output(&cmd.out);
    m.stage("encode");
    m.write_beside(&cmd.out)?;
    Ok(())
}

pub fn decode_cmd(cmd: &DecodeCmd) -> Result<()> {
    let mut m = RunManifest::new("decode", None);
    let table = load_table(&cmd.embeddings, &mut m)?;
    m.input(&cmd.seqvec)?;
    let file = File::open(&cmd.seqvec).map_err(|e| Error::Io {
        path: cmd.seqvec.clone(),
        source: e,
    })?;
    let (len, values) = read_sequence_vector(io::BufReader::new(file), &cmd.seqvec)?;
    if values.len() != table.dim() {
        return Err(Error::Dimension {
            expected: table.dim(),
            actual: values.len(),
        }
        .into());
    }
    m.stage("load");
    let decoded = decode(&SequenceVector::new(values, len)?, &table)?;
    let mut text = String::from("position,node_id,score\n");
    for (pos, (node, score)) in decoded.iter().enumerate() {
        text.push_str(&format!("{},{},{score:.6}\n", pos + 1, table.id(*node)));
    }
    io::stdout().write_all(text.as_bytes())?;
    m.stage("decode");
    if let Some(out) = &cmd.out {
        let mut w = create(out)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        m.output(out);
        m.write_beside(out)?;
    }
    Ok(())
}

pub fn classify_cmd(cmd: &ClassifyCmd) -> Result<()> {
    let mut m = RunManifest::new("eval classify", Some(cmd.seed));
    m.config(
        "split",
        format!("{},{},{}", cmd.split.train, cmd.split.valid, cmd.split.test),
    );
    m.input(&cmd.embeddings)?;
    m.input(&cmd.labels)?;
    let emb = load_embeddings(&cmd.embeddings)?;
    let nodes = Graph::from_arcs(emb.ids.clone(), [])?;
    let labels = LabelSet::load(&cmd.labels, &nodes)?;
    m.stage("load");
    let split = sense::eval::SplitSpec {
        seed: cmd.seed,
        ..cmd.split
    };
    let report = train_ovr_classifier(&emb.rows, &labels, &split)?;
    info!("chosen L2 {}; excluded labels {:?}", report.l2, report.excluded_labels);
    m.config("chosen_l2", report.l2);
    m.stage("classify");
    write_error_csv(create(&cmd.out)?, &report.rows())?;
    m.output(&cmd.out);
    m.write_beside(&cmd.out)?;
    Ok(())
}

pub fn linkpred_cmd(cmd: &LinkpredCmd) -> Result<()> {
    let mut m = RunManifest::new("eval linkpred", Some(cmd.opts.seed));
    record_train_opts(&mut m, &cmd.opts);
    m.config("holdout", cmd.holdout);
    m.config(
        "split",
        format!("{},{},{}", cmd.split.train, cmd.split.valid, cmd.split.test),
    );
    let corpus = load_corpus(&cmd.opts, &mut m)?;
    m.stage("load");
    let split = sense::eval::SplitSpec {
        seed: cmd.opts.seed,
        ..cmd.split
    };
    let report = link_prediction(
        &corpus.graph,
        |residual: &Graph| -> sense::Result<Matrix> {
            Ok(fit(residual, corpus.text.as_ref(), &cmd.opts)?.node_embeddings(false).0)
        },
        cmd.holdout,
        &split,
        cmd.opts.seed,
    )?;
    info!(
        "{} held-out links, {} non-links, chosen L2 {}",
        report.positives, report.negatives, report.l2
    );
    m.config("chosen_l2", report.l2);
    m.stage("linkpred");
    write_error_csv(create(&cmd.out)?, &report.rows())?;
    m.output(&cmd.out);
    m.write_beside(&cmd.out)?;
    Ok(())
}

/// Reorders a table's rows to follow the graph's node indices.
fn align_to_graph(table: &EmbeddingTable, graph: &Graph) -> Result<EmbeddingTable> {
    let rows: Vec<Vec<f64>> = graph
        .node_ids()
        .iter()
        .map(|id| table.index_of(id).map(|i| table.row(i).to_vec()))
        .collect::<sense::Result<_>>()?;
    Ok(EmbeddingTable::new(
        graph.node_ids().to_vec(),
        Matrix::from_rows(&rows),
        false,
    )?)
}

pub fn sweep_cmd(cmd: &SweepCmd) -> Result<()> {
    let mut m = RunManifest::new("eval decode-sweep", Some(cmd.seed));
    m.config("mode", format!("{:?}", cmd.mode).to_lowercase());
    m.config("trials", cmd.trials);
    m.config("lengths", join(&cmd.lengths));

    let (exp_mode, graph, tables) = match cmd.mode {
        SequenceModeArg::RandomNodes => {
            m.config("n", cmd.n);
            (SequenceMode::RandomNodes, None, Vec::new())
        }
        SequenceModeArg::RandomWalk => {
            let edges = cmd
                .edges
                .as_ref()
                .ok_or_else(|| Error::Config("random-walk mode needs --edges".into()))?;
            if cmd.embeddings.is_empty() {
                return Err(Error::Config("random-walk mode needs --embeddings".into()).into());
            }
            m.input(edges)?;
            let graph = Graph::load_edge_list(edges, cmd.directed)?;
            let tables = cmd
                .embeddings
                .iter()
                .map(|p| align_to_graph(&load_table(p, &mut m)?, &graph))
                .collect::<Result<Vec<_>>>()?;
            (SequenceMode::RandomWalk, Some(graph), tables)
        }
    };
    let dims = match (&cmd.dims, cmd.mode) {
        (Some(d), _) => d.clone(),
        (None, SequenceModeArg::RandomWalk) => tables.iter().map(EmbeddingTable::dim).collect(),
        (None, SequenceModeArg::RandomNodes) => vec![128, 256, 512, 1024],
    };
    m.config("dims", join(&dims));
    m.stage("load");

    let exp = DecodeExperiment {
        mode: exp_mode,
        dims,
        lengths: cmd.lengths.clone(),
        trials: cmd.trials,
        seed: cmd.seed,
    };
    let cells = match &graph {
        Some(g) => decoding_sweep(
            &exp,
            &TableSource::Trained {
                graph: g,
                tables: &tables,
            },
        )?,
        None => decoding_sweep(&exp, &TableSource::Random { n: cmd.n })?,
    };
    for c in &cells {
        if let Some(note) = &c.note {
            log::warn!("dim {} length {}: {note}", c.dim, c.length);
        }
    }
    m.stage("sweep");
    write_sweep_csv(create(&cmd.out)?, &cells)?;
    m.output(&cmd.out);
    m.write_beside(&cmd.out)?;
    Ok(())
}

pub fn theorem_cmd(cmd: &TheoremCmd) -> Result<()> {
    let mut m = RunManifest::new("eval theorem-check", Some(cmd.seed));
    m.config("n", cmd.n);
    m.config("samples", cmd.samples);
    let mut rng = seeded(cmd.seed);
    let (stats, target) = match cmd.c {
        None => (independent_dot_stats(cmd.n, cmd.samples, &mut rng)?, 1.0 / cmd.n as f64),
        Some(c) => {
            m.config("c", c);
            m.config("m", cmd.m);
            m.config("frame", format!("{:?}", cmd.frame).to_lowercase());
            let stats = shifted_dot_stats(cmd.n, c, cmd.m, cmd.samples, cmd.frame.into(), &mut rng)?;
            (stats, (1.0 - c * c) / (cmd.n as f64 - 1.0))
        }
    };
    m.stage("sample");
    let text = format!(
        "statistic,value\nsamples,{}\nmean,{:.9e}\nvariance,{:.9e}\ntarget_variance,{:.9e}\nmean_std_error,{:.9e}\n",
        stats.count,
        stats.mean,
        stats.variance(),
        target,
        stats.std_error()
    );
    io::stdout().write_all(text.as_bytes())?;
    if let Some(out) = &cmd.out {
        let mut w = create(out)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
        m.output(out);
        m.write_beside(out)?;
    }
    Ok(())
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn error_code(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return e.code();
        }
        if cause.downcast_ref::<io::Error>().is_some() {
            return "E_IO";
        }
    }
    "E_RUN"
}
