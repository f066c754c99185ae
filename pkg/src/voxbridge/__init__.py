"""voxbridge: cross-lingual voice cloning via flow-based voice conversion.

An upstream conditional normalizing-flow model converts source-speaker
recordings to a target speaker's voice, a lightweight convolutional
acoustic model is trained on the converted data, and a MUSHRA toolkit
(statistics engine, test-administration service, listener UI) evaluates
the results.
"""

__version__ = "0.1.0"
