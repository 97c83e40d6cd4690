import abc

from src.hbf.adapters import repository, results


class AbstractUnitOfWork(abc.ABC):
    indexes: repository.AbstractIndexRepository
    reports: results.AbstractReportStore

    def __enter__(self):
        return self

    def __exit__(self, *args):
        self.rollback()

    def commit(self):
        self._commit()

    def collect_new_events(self):
        for index in self.indexes.seen:
            while index.events:
                yield index.events.pop(0)

    @abc.abstractmethod
    def _commit(self):
        raise NotImplementedError

    @abc.abstractmethod
    def rollback(self):
        raise NotImplementedError


class FileUnitOfWork(AbstractUnitOfWork):
    """
    Indexes and reports live in plain files. Nothing touches the disk
    until commit; leaving the block without one drops the staged work.

    """

    def __init__(self):
        self.indexes = repository.FileIndexRepository()
        self.reports = results.CsvReportStore()

    def __enter__(self):
        # events collected after the block still need the seen set,
        # so the repository is only replaced on entry
        self.indexes = repository.FileIndexRepository()
        self.reports = results.CsvReportStore()
        return super().__enter__()

    def _commit(self):
        for index in self.indexes.seen:
            self.indexes.save(index)
        self.reports.flush()

    def rollback(self):
        self.reports.discard()


# for mocks during tests
class FakeUnitOfWork(AbstractUnitOfWork):
    def __init__(self, indexes=()):
        self.indexes = repository.FakeIndexRepository(indexes)
        self.reports = results.FakeReportStore()
        self.committed = False

    def _commit(self):
        for index in self.indexes.seen:
            self.indexes.save(index)
        self.reports.flush()
        self.committed = True

    def rollback(self):
        self.reports.discard()
