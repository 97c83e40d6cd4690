from typing import List

from src.utils.logger import log
from src.hbf.domain import commands, events, model
from src.hbf.domain.exceptions import HbfError, InvalidArgument
from src.hbf.service_layer import experiments, unit_of_work


class UnknownIndex(HbfError, FileNotFoundError):
    pass


class UnknownExperiment(InvalidArgument):
    pass


def _get_index(uow: unit_of_work.AbstractUnitOfWork, path: str) -> model.Index:
    index = uow.indexes.get(path)
    if index is None:
        raise UnknownIndex(f"no index at {path}")
    return index


def _label_universe(records, labels) -> List[bytes]:
    universe = [bytes(label) for label in labels]
    known = set(universe)
    for value in sorted({value for _, value in records} - known):
        universe.append(value)
    return universe


def build_index(cmd: commands.BuildIndex, uow: unit_of_work.AbstractUnitOfWork):
    records = list(cmd.records)
    memory = model.build(
        records, cmd.dim, cmd.gain, cmd.key_seed, cmd.value_seed, normalize=cmd.normalize
    )
    index = model.Index(cmd.path, memory, _label_universe(records, cmd.labels))
    index.events.append(
        events.IndexBuilt(
            path=cmd.path,
            dim=memory.dim,
            item_count=memory.item_count,
            label_count=len(index.labels),
        )
    )
    with uow:
        uow.indexes.add(index)
        uow.commit()
    return index


def insert_record(cmd: commands.InsertRecord, uow: unit_of_work.AbstractUnitOfWork):
    with uow:
        index = _get_index(uow, cmd.path)
        index.insert(cmd.key, cmd.value)
        uow.commit()
        return index.memory.item_count


def _query_decoder(cmd: commands.QueryIndex, index: model.Index) -> model.DecoderConfig:
    if cmd.tau is not None:
        return model.DecoderConfig(
            cmd.tau, cmd.delta or 0.0, cmd.top_k or model.DEFAULT_TOP_K
        )
    if index.decoder is not None:
        decoder = index.decoder
    else:
        log.info("no stored decoder for %s; calibrating at eps=%s", index.path, cmd.eps)
        decoder = experiments.calibrate_decoder(
            index.memory, index.labels, experiments.MIN_PROBES * 10, cmd.eps, cmd.seed
        )
    return model.DecoderConfig(
        decoder.tau,
        decoder.delta if cmd.delta is None else cmd.delta,
        cmd.top_k or decoder.top_k,
    )


def query_index(cmd: commands.QueryIndex, uow: unit_of_work.AbstractUnitOfWork):
    with uow:
        index = _get_index(uow, cmd.path)
        if index.is_empty:
            return model.NOTHING_STORED
        return index.query(cmd.key, _query_decoder(cmd, index))


def calibrate_index(cmd: commands.CalibrateIndex, uow: unit_of_work.AbstractUnitOfWork):
    with uow:
        index = _get_index(uow, cmd.path)
        decoder = experiments.calibrate_decoder(
            index.memory, index.labels, cmd.probe_count, cmd.eps, cmd.seed, cmd.top_k
        )
        index.calibrate(decoder)
        uow.commit()
        return decoder


def amplified_query(cmd: commands.AmplifiedQuery, uow: unit_of_work.AbstractUnitOfWork):
    with uow:
        indexes = [_get_index(uow, path) for path in cmd.paths]
        labels = indexes[0].labels
        if any(sorted(index.labels) != sorted(labels) for index in indexes[1:]):
            raise InvalidArgument("amplified indexes must share one label universe")
        if all(index.is_empty for index in indexes):
            return model.NOTHING_STORED
        outcomes = []
        for index in indexes:
            # an empty index votes BOTTOM without calibrating
            if index.is_empty:
                outcomes.append(model.NOTHING_STORED)
                continue
            decoder = index.decoder or experiments.calibrate_decoder(
                index.memory, labels, experiments.MIN_PROBES * 10, cmd.eps, cmd.seed
            )
            outcomes.append(model.decode(index.memory, cmd.key, decoder, labels))
        return experiments.vote(
            outcomes, experiments.AmplifiedConfig(len(indexes)).majority
        )


def run_experiment(cmd: commands.RunExperiment, uow: unit_of_work.AbstractUnitOfWork):
    cfg = cmd.config
    options = cmd.options
    if cmd.kind == "fp":
        result = experiments.run_fp_experiment(cfg)
    elif cmd.kind == "fn":
        result = experiments.run_fn_experiment(cfg)
    elif cmd.kind == "capacity":
        result = experiments.run_capacity_sweep(cfg, options.get("grid") or [cfg.n])
    elif cmd.kind == "amplify":
        amp = experiments.AmplifiedConfig(options.get("r", 3))
        result = experiments.run_amplification_experiment(cfg, amp)
    elif cmd.kind == "baseline":
        result = experiments.run_baseline_experiment(
            cfg, options.get("p", 0.9), options.get("ells") or [10], options.get("T", 1.0)
        )
    else:
        raise UnknownExperiment(f"unknown experiment {cmd.kind!r}")

    out = cmd.out or cfg.out
    if out:
        with uow:
            uow.reports.add(out, result.columns, result.rows)
            uow.commit()
    return result


def invalidate_calibration(
    event: events.RecordInserted, uow: unit_of_work.AbstractUnitOfWork
):
    with uow:
        index = uow.indexes.get(event.path)
        if index is not None and index.decoder is not None:
            log.info("insert into %s makes its calibration stale; dropping it", event.path)
            index.decoder = None
            uow.commit()


def log_calibration(event: events.DecoderCalibrated, uow: unit_of_work.AbstractUnitOfWork):
    log.info(
        "index %s calibrated: tau=%s delta=%s top_k=%s",
        event.path,
        event.tau,
        event.delta,
        event.top_k,
    )


def log_build(event: events.IndexBuilt, uow: unit_of_work.AbstractUnitOfWork):
    log.info(
        "built index %s: d=%s items=%s labels=%s",
        event.path,
        event.dim,
        event.item_count,
        event.label_count,
    )
