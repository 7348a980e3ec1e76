"""CLI commands for the numeric loss and tensor kernels."""

from typing import Optional

import click

from src.cli_common import echo_json, fail
from src.contrastive import NTXentLoss
from src.models import EmbeddingBatch
from src.repository import DataRepository
from src.sr_kernels import SRKernels


@click.command()
@click.argument("embeddings")
@click.option("--tau", type=float, default=NTXentLoss.DEFAULT_TEMPERATURE, help="温度パラメータ τ")
def ntxent(embeddings: str, tau: float):
    """埋め込みCSVからNT-Xent損失を計算しJSONで出力します。

    CSVは1行1ベクトルで、正例ペアは隣接する2行 (2m, 2m+1) です。

    Args:
        embeddings: 埋め込みCSV
    """
    try:
        batch = EmbeddingBatch(DataRepository.load_embeddings(embeddings))
        loss = NTXentLoss(tau)
        document = {
            "tau": loss.tau,
            "pairs": batch.pair_count,
            "batch_loss": loss.batch_loss(batch),
            "pair_losses": loss.pair_losses(batch),
        }
    except (ValueError, IOError) as e:
        fail("入力エラー", e)
    echo_json(document)


@click.command("sr-loss")
@click.argument("reference")
@click.argument("estimate")
@click.option("--r", "factor", type=int, default=SRKernels.DEFAULT_FACTOR, help="拡大倍率 r")
@click.option("--feature", is_flag=True, help="特徴マップ空間の内容損失を使う")
@click.option(
    "--average-channels/--sum-channels",
    default=None,
    help="チャネル方向を平均するか合計するか",
)
@click.option("--adversarial", type=float, default=None, help="敵対的損失 (知覚損失を出力)")
def sr_loss(
    reference: str,
    estimate: str,
    factor: int,
    feature: bool,
    average_channels: Optional[bool],
    adversarial: Optional[float],
):
    """超解像の内容損失 (と知覚損失) を計算しJSONで出力します。

    Args:
        reference: 高解像度 (または φ(HR)) のテンソルCSV
        estimate: 超解像結果 (または φ(SR)) のテンソルCSV
    """
    try:
        hr = DataRepository.load_tensor(reference)
        sr = DataRepository.load_tensor(estimate)
        if feature:
            averaged = bool(average_channels)
            content = SRKernels.feature_content_loss(hr, sr, average_channels=averaged)
            document = {"kind": "feature", "average_channels": averaged}
        else:
            averaged = True if average_channels is None else average_channels
            if hr.width % factor or hr.height % factor:
                raise SRKernels.DivisibilityError(
                    f"reference {hr.width}x{hr.height} is not divisible by r = {factor}"
                )
            content = SRKernels.mse_content_loss(
                hr, sr, factor, hr.width // factor, hr.height // factor, average_channels=averaged
            )
            document = {"kind": "mse", "r": factor, "average_channels": averaged}
        document["content_loss"] = content
        if adversarial is not None:
            document["adversarial_loss"] = adversarial
            document["perceptual_loss"] = SRKernels.perceptual_loss(content, adversarial)
    except SRKernels.ShapeMismatchError as e:
        fail("形状エラー", e)
    except ValueError as e:
        fail("パラメータエラー", e)
    except IOError as e:
        fail("入力エラー", e)
    echo_json(document)


@click.command("pixel-shuffle")
@click.argument("source")
@click.argument("output")
@click.option("--r", "factor", type=int, default=2, help="拡大倍率 r")
@click.option("--inverse", is_flag=True, help="逆変換 (pixel unshuffle) を行う")
def pixel_shuffle(source: str, output: str, factor: int, inverse: bool):
    """テンソルCSVにピクセルシャッフルを適用します。

    Args:
        source: 入力テンソルCSV
        output: 出力テンソルCSV
    """
    try:
        tensor = DataRepository.load_tensor(source)
        if inverse:
            result = SRKernels.pixel_unshuffle(tensor, factor)
        else:
            result = SRKernels.pixel_shuffle(tensor, factor)
        DataRepository.save_tensor(result, output)
    except ValueError as e:
        fail("パラメータエラー", e)
    except IOError as e:
        fail("入出力エラー", e)
    width, height, channels = result.shape
    echo_json({"input": list(tensor.shape), "output": [width, height, channels], "path": output})
