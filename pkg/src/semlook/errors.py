"""Exception hierarchy shared by every semlook module."""


class SemlookError(Exception):
    """Base class for domain errors (the CLI maps these to exit code 1)."""


class InvalidName(SemlookError, ValueError):
    pass


class DanglingOntologyRef(SemlookError):
    """An RDF triplet has no matching ontology triplet in the store."""


class AmbiguousInstance(SemlookError):
    def __init__(self, instance, concepts):
        self.instance = instance
        self.concepts = tuple(sorted(concepts))
        super().__init__(
            f"instance {instance!r} is declared with several concepts: "
            + ", ".join(self.concepts)
        )


class UnknownPage(SemlookError, KeyError):
    def __str__(self):
        return f"unknown page {self.args[0]!r}"


class UnknownConcept(SemlookError):
    pass


class UnresolvedConcept(SemlookError):
    def __init__(self, keyword):
        self.keyword = keyword
        super().__init__(f"cannot resolve concept for keyword {keyword!r}")


class CorruptStore(SemlookError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"corrupt store at line {line}: {reason}")


class MalformedDocument(SemlookError):
    pass


class FetchError(SemlookError):
    def __init__(self, ref, reason=""):
        self.ref = ref
        super().__init__(f"cannot fetch {ref!r}" + (f": {reason}" if reason else ""))


class SourceUnavailable(SemlookError):
    pass


class TooFewTerms(SemlookError):
    pass


class TooManyTerms(SemlookError):
    pass


class NoRelationalContext(SemlookError):
    """No pair of query concepts is related by any ontology predicate."""


class InvalidArgs(SemlookError, ValueError):
    pass


class TooLarge(SemlookError):
    pass
