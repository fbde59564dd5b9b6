import os
import shutil


def install_examples(path="./slopeforge-Examples"):
    """
    Install the example input documents for slopeforge in the given location.

    The path must not exist yet. The default path ("./slopeforge-Examples") is chosen to make collision unlikely.

    Each example is a JSON document that can be passed to the slopeforge command, for example

        slopeforge kisin decompose slopeforge-Examples/kisin_theta.json
    """

    examples_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "Examples")

    shutil.copytree(examples_path, path)

    return path
