"""
LLM调用相关的Pydantic模型

定义chat-completions请求的消息结构和回复
"""
from typing import List, Literal

from pydantic import BaseModel, ConfigDict, Field

from app.models.prompt import PromptBundle


class ChatMessage(BaseModel):
    """单条聊天消息"""

    role: Literal["system", "user", "assistant"]
    content: str


class ChatReply(BaseModel):
    """LLM回复"""

    model_config = ConfigDict(frozen=True)

    text: str = Field(..., min_length=1)
    latency_ms: float = Field(..., ge=0.0)
    attempt: int = Field(..., ge=1, description="成功时的尝试序号（从1开始）")


def to_messages(bundle: PromptBundle) -> List[ChatMessage]:
    """PromptBundle -> system + user 消息"""
    return [
        ChatMessage(role="system", content=bundle.system_text),
        ChatMessage(role="user", content=bundle.user_text),
    ]
