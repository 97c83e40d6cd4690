import logging
from collections import deque
from typing import Callable, Deque, Dict, List, Type, Union

from tenacity import (
    RetryError,
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.utils.logger import log
from src.hbf.domain import commands, events
from src.hbf.domain.exceptions import HbfError
from src.hbf.service_layer import handlers, unit_of_work

Message = Union[commands.Command, events.Event]

EVENT_ATTEMPTS = 3


def handle(message: Message, uow: unit_of_work.AbstractUnitOfWork) -> list:
    """
    Run `message` and every event it raises, in order. Returns one result
    per command handled; event handlers contribute nothing.

    """
    results = []
    queue = deque([message])  # type: Deque[Message]
    while queue:
        message = queue.popleft()
        if isinstance(message, commands.Command):
            results.append(handle_command(message, queue, uow))
        elif isinstance(message, events.Event):
            handle_event(message, queue, uow)
        else:
            raise TypeError(f"{message!r} is neither an Event nor a Command")
    return results


def _event_retrying() -> Retrying:
    # only file I/O can succeed on a second try; domain errors are final
    return Retrying(
        retry=retry_if_exception_type(OSError),
        stop=stop_after_attempt(EVENT_ATTEMPTS),
        wait=wait_exponential(max=2),
        before_sleep=before_sleep_log(log, logging.WARNING),
    )


def handle_event(
    event: events.Event, queue: Deque[Message], uow: unit_of_work.AbstractUnitOfWork
):
    for handler in EVENT_HANDLERS[type(event)]:
        try:
            for attempt in _event_retrying():
                with attempt:
                    log.debug("%s -> %s", type(event).__name__, handler.__name__)
                    handler(event, uow=uow)
                    queue.extend(uow.collect_new_events())
        except RetryError as retry_failure:
            log.error(
                "giving up on %s for %s after %s attempts",
                handler.__name__,
                event,
                retry_failure.last_attempt.attempt_number,
            )
        except HbfError:
            log.exception("%s failed on %s", handler.__name__, event)


def handle_command(
    command: commands.Command,
    queue: Deque[Message],
    uow: unit_of_work.AbstractUnitOfWork,
):
    handler = COMMAND_HANDLERS[type(command)]
    log.debug("%s -> %s", type(command).__name__, handler.__name__)
    try:
        result = handler(command, uow=uow)
    except Exception:
        log.exception("command %s failed", type(command).__name__)
        raise
    queue.extend(uow.collect_new_events())
    return result


EVENT_HANDLERS = {
    events.IndexBuilt: [handlers.log_build],
    events.RecordInserted: [handlers.invalidate_calibration],
    events.DecoderCalibrated: [handlers.log_calibration],
}  # type: Dict[Type[events.Event], List[Callable]]


COMMAND_HANDLERS = {
    commands.BuildIndex: handlers.build_index,
    commands.InsertRecord: handlers.insert_record,
    commands.QueryIndex: handlers.query_index,
    commands.CalibrateIndex: handlers.calibrate_index,
    commands.AmplifiedQuery: handlers.amplified_query,
    commands.RunExperiment: handlers.run_experiment,
}  # type: Dict[Type[commands.Command], Callable]
