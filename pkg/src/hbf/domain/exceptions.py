"""
Domain exceptions shared by the vector algebra, the index and the harness.

"""


# -----------------
# DOMAIN EXCEPTIONS
# -----------------
class HbfError(Exception):
    pass


class InvalidArgument(HbfError, ValueError):
    pass


class UnsupportedDimension(InvalidArgument):
    pass


class DuplicateKey(InvalidArgument):
    pass


class DuplicateLabel(InvalidArgument):
    pass


class EmptyMemory(InvalidArgument):
    pass


class DegenerateCalibration(HbfError):
    pass
