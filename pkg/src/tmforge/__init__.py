"""Toolkit for building translation memories from bilingual websites.

The pieces mirror a translator's manual workflow: mirror the site, pair the
bilingual documents by filename, extract and segment the text, align the
sentences, then compile, clean and export a TMX translation memory that a
human can review before use.
"""

__version__ = "0.1.0"
