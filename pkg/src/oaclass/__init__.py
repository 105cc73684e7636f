"""Open Access classification of scholarly publication records.

Records are joined with locally stored evidence (Crossref-style metadata,
Unpaywall/BASE-style location records, journal and repository registries)
and assigned Gold, Green or Non-OA classes, which can then be aggregated
into share reports.
"""

__version__ = "0.1.0"
