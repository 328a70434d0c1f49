//! End-to-end augmentation runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ocdc_core::ingest::merge_class_names;
use ocdc_core::labels::{base_label_map, switch_labels};
use ocdc_core::ocdc::augment_pair_split;
use ocdc_core::seed::{stream_rng, Stream};
use ocdc_core::{
    pair_batches, resize_to_training, subsample, AnnotatedImage, BatchSample, Dataset, Domain, PasteRecord,
};
use rayon::prelude::*;

use crate::annotations::{load_annotations, AnnotationFile};
use crate::artifacts::{
    iteration_dir, sha256_hex, side_files, IterationEntry, Manifest, PasteSidecar, FORMAT, MANIFEST,
};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::imageio::{encode_label_map, encode_png, write_atomic};

/// Source and target datasets after class unification, subsampling and resizing.
pub struct PreparedData {
    pub source: Dataset,
    pub target: Dataset,
}

pub fn prepare(config: &PipelineConfig) -> Result<PreparedData> {
    let source = load_annotations(&config.source_images, &config.source_ann, Domain::Source)?;
    let target = load_annotations(&config.target_images, &config.target_ann, Domain::Target)?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::Core(ocdc_core::Error::EmptyDataset));
    }
    let classes = merge_class_names(source.class_names(), target.class_names());
    let source = source.with_class_names(&classes)?;
    let target = target.with_class_names(&classes)?;

    if !config.target_fraction.is_standard_split() {
        log::warn!(
            "target fraction {} is not one of 1, 1/2, ..., 1/64",
            config.target_fraction
        );
    }
    let target = subsample(&target, config.target_fraction, config.seed)?;

    let (source, target) = if config.resize {
        (resize_all(source)?, resize_all(target)?)
    } else {
        (source, target)
    };
    Ok(PreparedData { source, target })
}

fn resize_all(dataset: Dataset) -> Result<Dataset> {
    let resized: Vec<AnnotatedImage> = dataset.items().par_iter().map(resize_to_training).collect();
    Ok(Dataset::new(dataset.domain(), dataset.class_names().to_vec(), resized)?)
}

/// Runs augmentation for `config.epoch_length` iterations and writes every
/// artifact plus the manifest. Output bytes depend only on the settings echoed
/// into the manifest, never on `workers`.
pub fn run_augment(config: &PipelineConfig) -> Result<Manifest> {
    config.validate()?;
    let out_dir = &config.out_dir;
    if out_dir.exists() {
        let mut entries = fs::read_dir(out_dir).map_err(|e| Error::io(out_dir, e))?;
        if entries.next().is_some() {
            return Err(Error::Config(format!(
                "output directory {} is not empty",
                out_dir.display()
            )));
        }
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;

    pool.install(|| {
        let data = prepare(config)?;
        let classes = data.source.class_names().to_vec();
        let samples = pair_batches(&data.source, &data.target, config.epoch_length, config.seed)?;
        log::info!(
            "{} source and {} target images, {} iterations on {} workers",
            data.source.len(),
            data.target.len(),
            samples.len(),
            config.workers
        );
        let results = samples
            .par_iter()
            .map(|sample| run_iteration(config, sample, &classes))
            .collect::<Result<Vec<_>>>()?;

        let mut files = BTreeMap::new();
        let mut iterations = Vec::with_capacity(results.len());
        for (entry, hashes) in results {
            iterations.push(entry);
            files.extend(hashes);
        }
        let manifest = Manifest {
            format: FORMAT.into(),
            config: config.echo(),
            classes,
            source_items: data.source.len(),
            target_items: data.target.len(),
            iterations,
            files,
        };
        write_atomic(&out_dir.join(MANIFEST), &manifest.to_json())?;
        log::info!("wrote {} files to {}", manifest.files.len(), out_dir.display());
        Ok(manifest)
    })
}

type FileHashes = Vec<(String, String)>;

fn run_iteration(
    config: &PipelineConfig,
    sample: &BatchSample<'_>,
    classes: &[String],
) -> Result<(IterationEntry, FileHashes)> {
    let index = sample.iteration_index;
    let mut into_source_rng = stream_rng(config.seed, index, Stream::IntoSource);
    let mut into_target_rng = stream_rng(config.seed, index, Stream::IntoTarget);
    let pair = augment_pair_split(sample, &config.strategy, &mut into_source_rng, &mut into_target_rng)?;

    let dir_name = iteration_dir(index);
    let dir = config.out_dir.join(&dir_name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let mut hashes = Vec::with_capacity(8);
    for (image, records) in [(&pair.source, &pair.into_source), (&pair.target, &pair.into_target)] {
        for (name, bytes) in side_artifacts(image, records, classes, config.stride)? {
            write_atomic(&dir.join(&name), &bytes)?;
            hashes.push((format!("{dir_name}/{name}"), sha256_hex(&bytes)));
        }
    }
    let entry = IterationEntry {
        index,
        dir: dir_name,
        source_image: sample.source_item.image_id().into(),
        target_image: sample.target_item.image_id().into(),
        pastes_into_source: pair.into_source.len(),
        pastes_into_target: pair.into_target.len(),
    };
    Ok((entry, hashes))
}

/// Encoded files for one augmented image: PNG, annotations, label map, sidecar.
pub fn side_artifacts(
    image: &AnnotatedImage,
    records: &[PasteRecord],
    classes: &[String],
    stride: u32,
) -> Result<Vec<(String, Vec<u8>)>> {
    let names = side_files(image.domain());
    let labels = switch_labels(&base_label_map(image.domain(), image.size(), stride)?, records)?;
    Ok(vec![
        (names.image.clone(), encode_png(image.pixels())),
        (
            names.annotations,
            AnnotationFile::single(image, &names.image, classes).to_json(),
        ),
        (names.labels, encode_label_map(&labels)),
        (
            names.pastes,
            PasteSidecar::new(image.image_id(), image.domain(), records, classes).to_json(),
        ),
    ])
}

/// Writes the `fraction` subset of an annotation file, preserving its records.
pub fn run_subsample(
    images_dir: &Path,
    annotations: &Path,
    domain: Domain,
    fraction: ocdc_core::Fraction,
    seed: u64,
    out: &Path,
) -> Result<usize> {
    if !fraction.is_standard_split() {
        log::warn!("fraction {fraction} is not one of 1, 1/2, ..., 1/64");
    }
    let dataset = load_annotations(images_dir, annotations, domain)?;
    let picked = subsample(&dataset, fraction, seed)?;
    let mut file = AnnotationFile::read(annotations)?;
    let keep: std::collections::BTreeSet<&str> = picked.items().iter().map(|i| i.image_id()).collect();
    file.images.retain(|rec| keep.contains(rec.id.as_str()));
    file.images.sort_by(|a, b| a.id.cmp(&b.id));
    write_atomic(out, &file.to_json())?;
    Ok(file.images.len())
}
