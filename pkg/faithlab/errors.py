"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Exception Types
"""


class FaithlabError(Exception): ...


class InputError(FaithlabError, ValueError): ...


class ModelInvariantError(FaithlabError, ValueError): ...


class SizeLimitError(FaithlabError): ...


class UnknownVertexError(FaithlabError, LookupError): ...


class StatementError(FaithlabError, ValueError): ...


class PreconditionError(FaithlabError, ValueError): ...


class SearchFailureError(FaithlabError, RuntimeError): ...


class DegeneratePathError(FaithlabError, ValueError): ...


class InvariantViolationError(FaithlabError, AssertionError): ...
